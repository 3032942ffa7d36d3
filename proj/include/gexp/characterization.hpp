#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gexp/distribution.hpp"
#include "gexp/error.hpp"
#include "gexp/gheat.hpp"
#include "gexp/independence.hpp"
#include "gexp/sublinear.hpp"
#include "gexp/test_function.hpp"

namespace gexp {

/// Two laws count as equal when they differ by at most this much on the
/// canonical family (about twice the solver's truncation error).
inline constexpr double kLawEqualityThreshold = 5e-3;

/// A negative control must exceed the equality threshold by this factor.
inline constexpr double kControlMarginFactor = 10.0;

inline double positive_part(double x) { return std::max(x, 0.0); }
inline double negative_part(double x) { return std::max(-x, 0.0); }

/// Upper mean of lambda X + f Y with Y independent of X:
/// f mu_bar_Y + lambda^+ mu_bar_X - lambda^- mu_low_X.
inline double mean_upper(double lambda, double f_val, const MomentSummary& x, const MomentSummary& y) {
    return f_val * y.mu_bar + positive_part(lambda) * x.mu_bar - negative_part(lambda) * x.mu_low;
}

/// Lower mean of lambda X + f Y: f mu_low_Y + lambda^+ mu_low_X - lambda^- mu_bar_X.
inline double mean_lower(double lambda, double f_val, const MomentSummary& x, const MomentSummary& y) {
    return f_val * y.mu_low + positive_part(lambda) * x.mu_low - negative_part(lambda) * x.mu_bar;
}

/// Second moment of lambda X + f Y when both means vanish: lambda^2 var_x + f^2 var_y.
inline double variance_identity(double lambda, double f_val, double var_x, double var_y) {
    if (var_x < 0.0 || var_y < 0.0)
        throw PreconditionError("variance_identity: variances must be nonnegative");
    return lambda * lambda * var_x + f_val * f_val * var_y;
}

/// f(lambda) = sqrt(a - b lambda^2) on [-sqrt(a/b), sqrt(a/b)].
class FFamily {
public:
    FFamily(double a, double b) : a_(a), b_(b) {
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
            throw ValidationError("FFamily: a and b must be positive and finite");
    }

    double a() const { return a_; }
    double b() const { return b_; }
    double half_width() const { return std::sqrt(a_ / b_); }
    bool in_domain(double lambda) const {
        return std::abs(lambda) <= half_width() * (1.0 + kAlgebraicTol);
    }

    double operator()(double lambda) const {
        if (!in_domain(lambda)) throw DomainError("FFamily: lambda outside [-sqrt(a/b), sqrt(a/b)]");
        const double w = half_width(), l = std::abs(lambda);
        return std::sqrt(std::max(0.0, b_ * (w - l) * (w + l)));
    }

    /// Same evaluator, NaN outside the domain (for scans, which skip such lambdas).
    std::function<double(double)> as_function() const {
        const FFamily self = *this;
        return [self](double lambda) {
            return self.in_domain(lambda) ? self(lambda) : std::numeric_limits<double>::quiet_NaN();
        };
    }

private:
    double a_;
    double b_;
};

/// a = var_bar_target / var_bar_y, b = var_bar_x / var_bar_y. Requires both
/// laws to be mean-certain at zero.
inline FFamily solve_f_family(const MomentSummary& x, const MomentSummary& y, double var_bar_target,
                              double mean_tol = 1e-9) {
    for (double m : {x.mu_bar, x.mu_low, y.mu_bar, y.mu_low}) {
        if (std::abs(m) > mean_tol)
            throw PreconditionError(
                "solve_f_family: the square-root family only arises when both upper and lower "
                "means of X and Y vanish");
    }
    if (!(y.var_bar > mean_tol)) throw PreconditionError("solve_f_family: Y is degenerate (var_bar ~ 0)");
    return {var_bar_target / y.var_bar, x.var_bar / y.var_bar};
}

enum class ReferenceKind { X, LambdaZero, Custom };

inline const char* to_string(ReferenceKind r) {
    switch (r) {
        case ReferenceKind::X: return "X";
        case ReferenceKind::LambdaZero: return "lambda0";
        case ReferenceKind::Custom: return "custom";
    }
    return "unknown";
}

struct InvarianceReport {
    std::vector<double> lambdas;
    std::vector<double> f_values;
    std::vector<double> deviations;
    std::vector<std::string> worst_phi;
    std::vector<double> h_bar;
    std::vector<double> h_low;
    std::vector<double> skipped;
    double max_deviation = 0.0;
    std::string reference;
};

/// For each lambda with f(lambda) defined and >= 0, measures how far the law
/// of lambda X + f(lambda) Y (Y independent of X) is from the reference law.
///
/// Lambdas where f is undefined (NaN) or negative are skipped and listed.
inline InvarianceReport invariance_scan(const SublinearDistribution& dist_x,
                                        const SublinearDistribution& dist_y,
                                        const std::function<double(double)>& f,
                                        std::span<const double> lambda_grid,
                                        std::span<const TestFunction> family, ReferenceKind reference,
                                        const std::optional<SublinearDistribution>& custom = {}) {
    if (family.empty()) throw ValidationError("invariance_scan: empty test-function family");
    InvarianceReport rep;
    std::vector<std::pair<double, double>> usable;
    for (double lam : lambda_grid) {
        const double fv = f(lam);
        if (std::isfinite(fv) && fv >= 0.0) {
            usable.emplace_back(lam, fv);
        } else {
            rep.skipped.push_back(lam);
        }
    }
    if (usable.empty()) throw DomainError("invariance_scan: no lambda in the grid has f(lambda) >= 0");

    std::optional<SublinearDistribution> ref;
    switch (reference) {
        case ReferenceKind::X:
            ref = dist_x;
            break;
        case ReferenceKind::LambdaZero: {
            const double f0 = f(0.0);
            if (!std::isfinite(f0) || f0 < 0.0)
                throw DomainError("invariance_scan: f(0) undefined, no lambda = 0 reference");
            ref = comb_law(dist_x, dist_y, 0.0, f0);
            break;
        }
        case ReferenceKind::Custom:
            if (!custom) throw ValidationError("invariance_scan: custom reference not supplied");
            ref = *custom;
            break;
    }
    rep.reference = reference == ReferenceKind::Custom ? ref->describe() : to_string(reference);

    std::vector<double> ref_values;
    ref_values.reserve(family.size());
    for (const auto& phi : family) ref_values.push_back(dist_expect(*ref, phi));

    for (const auto& [lam, fv] : usable) {
        const auto law = comb_law(dist_x, dist_y, lam, fv);
        double worst = 0.0;
        std::string worst_name = family.front().name();
        for (std::size_t k = 0; k < family.size(); ++k) {
            const double d = std::abs(dist_expect(law, family[k]) - ref_values[k]);
            if (d > worst) {
                worst = d;
                worst_name = family[k].name();
            }
        }
        rep.lambdas.push_back(lam);
        rep.f_values.push_back(fv);
        rep.deviations.push_back(worst);
        rep.worst_phi.push_back(worst_name);
        rep.h_bar.push_back(dist_expect(law, phi::identity()));
        rep.h_low.push_back(dist_lower_expect(law, phi::identity()));
        rep.max_deviation = std::max(rep.max_deviation, worst);
    }
    return rep;
}

/// Lambda grid used when none is configured.
inline std::vector<double> default_lambda_grid() {
    return {-0.9, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 0.9};
}

struct VerifyConfig {
    /// Unset: default_lambda_grid for theorem 1, theorem2_lambda_grid for theorem 2.
    std::optional<std::vector<double>> lambda_grid;
    double threshold = kLawEqualityThreshold;
    /// Scale of the canonical family; defaults to the upper volatility of X.
    std::optional<double> family_scale;
    SolverSettings solver{};
    /// Replaces sqrt(1 - lambda^2) (theorem 1) or sqrt(a - b lambda^2) (theorem 2).
    std::optional<std::function<double(double)>> f_override;
    std::string f_description;
};

struct Theorem1Report {
    InvarianceReport scan;
    MomentSummary moments;
    bool means_vanish = false;
    double threshold = kLawEqualityThreshold;
    bool pass = false;
};

/// Scans lambda X + f(lambda) Y against X for an independent copy Y of X,
/// with f(lambda) = sqrt(1 - lambda^2) unless overridden. PASS iff the largest
/// deviation is within threshold and the upper and lower means vanish.
inline Theorem1Report verify_theorem1(const SublinearDistribution& x, const VerifyConfig& cfg = {}) {
    Theorem1Report rep;
    rep.threshold = cfg.threshold;
    const auto f = cfg.f_override.value_or(
        [](double lam) { return std::sqrt(1.0 - lam * lam); });
    const double scale = cfg.family_scale.value_or(law_scale(x));
    const auto family = phi::canonical_family(scale);
    const auto grid = cfg.lambda_grid.value_or(default_lambda_grid());
    rep.scan = invariance_scan(x, x, f, grid, family, ReferenceKind::X);
    rep.moments = moment_summary(x);
    const double mean_tol = 1e-6 * (1.0 + rep.moments.var_bar);
    rep.means_vanish = std::abs(rep.moments.mu_bar) <= mean_tol && std::abs(rep.moments.mu_low) <= mean_tol;
    rep.pass = rep.means_vanish && rep.scan.max_deviation <= cfg.threshold;
    return rep;
}

inline Theorem1Report verify_theorem1(const GFunction1D& g, const VerifyConfig& cfg = {}) {
    return verify_theorem1(SublinearDistribution(GNormal{g, 0.0, cfg.solver}), cfg);
}

struct Theorem2Report {
    double a = 0.0;
    double b = 0.0;
    InvarianceReport scan;
    /// dist_distance(sqrt(a/b) X, sqrt(a) Y): the two endpoint laws.
    double endpoint_distance = 0.0;
    /// Per scanned lambda: distance between lambda X + f(lambda) Y and the
    /// re-parameterized combination of sqrt(a/b) X and sqrt(a) Y.
    std::vector<double> rescaling_lambdas;
    std::vector<double> rescaling_deviations;
    double max_rescaling_deviation = 0.0;
    double threshold = kLawEqualityThreshold;
    bool pass = false;
};

/// Lambda grid for a family with domain [-w, w]: the default grid scaled by w
/// plus both endpoints.
inline std::vector<double> theorem2_lambda_grid(const FFamily& fam) {
    const double w = fam.half_width();
    std::vector<double> grid;
    for (double l : default_lambda_grid()) grid.push_back(l * w);
    grid.push_back(-w);
    grid.push_back(w);
    std::sort(grid.begin(), grid.end());
    return grid;
}

/// Builds Y G-normal with volatilities sigma_X / sqrt(b) (unless `y_override`
/// is given) and checks that lambda X + sqrt(a - b lambda^2) Y does not move
/// with lambda, that sqrt(a/b) X and sqrt(a) Y coincide, and that
/// lambda X + f(lambda) Y matches
/// sqrt(1 - (b/a) lambda^2) (sqrt(a/b) X) + lambda sqrt(b/a) (sqrt(a) Y).
inline Theorem2Report verify_theorem2(const GFunction1D& g_x, double a, double b,
                                      const VerifyConfig& cfg = {},
                                      const std::optional<SublinearDistribution>& y_override = {}) {
    const FFamily fam(a, b);
    Theorem2Report rep;
    rep.a = a;
    rep.b = b;
    rep.threshold = cfg.threshold;

    const SublinearDistribution x(GNormal{g_x, 0.0, cfg.solver});
    const SublinearDistribution y =
        y_override.value_or(SublinearDistribution(GNormal{g_x.scaled(1.0 / std::sqrt(b)), 0.0, cfg.solver}));
    const auto f = cfg.f_override.value_or(fam.as_function());
    const auto grid = cfg.lambda_grid.value_or(theorem2_lambda_grid(fam));
    const double scale = cfg.family_scale.value_or(std::sqrt(a) * law_scale(y));
    const auto family = phi::canonical_family(scale);

    rep.scan = invariance_scan(x, y, f, grid, family, ReferenceKind::LambdaZero);

    const auto x_end = affine_image(x, std::sqrt(a / b), 0.0);
    const auto y_end = affine_image(y, std::sqrt(a), 0.0);
    rep.endpoint_distance = dist_distance(x_end, y_end, family);

    for (double lam : rep.scan.lambdas) {
        if (!fam.in_domain(lam)) continue;
        const auto lhs = comb_law(x, y, lam, fam(lam));
        const double c_x = std::sqrt(std::max(0.0, 1.0 - (b / a) * lam * lam));
        const double c_y = lam * std::sqrt(b / a);
        // A negative coefficient on sqrt(a) Y is carried by its mirror image.
        const auto y_side = c_y < 0.0 ? affine_image(y_end, -1.0, 0.0) : y_end;
        const auto rhs = comb_law(x_end, y_side, c_x, std::abs(c_y));
        const double d = dist_distance(lhs, rhs, family);
        rep.rescaling_lambdas.push_back(lam);
        rep.rescaling_deviations.push_back(d);
        rep.max_rescaling_deviation = std::max(rep.max_rescaling_deviation, d);
    }

    rep.pass = rep.scan.max_deviation <= cfg.threshold && rep.endpoint_distance <= cfg.threshold &&
               rep.max_rescaling_deviation <= cfg.threshold;
    return rep;
}

enum class ContradictionBranch { None, MeansDiffer, MeansEqualNonzero };

inline const char* to_string(ContradictionBranch b) {
    switch (b) {
        case ContradictionBranch::None: return "none";
        case ContradictionBranch::MeansDiffer: return "means_differ";
        case ContradictionBranch::MeansEqualNonzero: return "means_equal_nonzero";
    }
    return "unknown";
}

/// Outcome of replaying the mean-uncertainty case analysis for invariance
/// under lambda X + f(lambda) Y with Y an independent copy of X.
struct ContradictionReport {
    ContradictionBranch branch = ContradictionBranch::None;
    double alpha = 0.5;
    /// f value forced by the mean identities (1 - alpha) when a branch fires.
    double f_forced = std::numeric_limits<double>::quiet_NaN();
    /// Whether the forced f reproduces the identities only with mu_bar = -mu_low.
    bool symmetric_means = false;
    /// 2 alpha (1 - alpha) sigma_bar^2
    double lhs = 0.0;
    /// 2 alpha (1 - alpha) (E|X|)^2 (means differ) or 2 alpha (1 - alpha) mu_bar^2.
    double rhs = 0.0;
    /// Upper bound used for E|X|: the supplied value or sqrt(sigma_bar^2).
    double abs_mean_bound = 0.0;
    /// The chain lhs <= rhs together with rhs <= lhs forces E[X^2] <= (E|X|)^2,
    /// which contradicts non-degeneracy.
    bool contradiction = false;
};

/// Replays the two contradiction branches on concrete moments.
///
/// Means differ: f(-alpha) = 1 - alpha and mu_bar = -mu_low; the second-moment
/// chain then gives sigma_bar^2 <= (E|X|)^2. Means equal but nonzero:
/// f(alpha) = 1 - alpha and the chain gives sigma_bar^2 <= mu_bar^2. Either
/// contradicts E[X^2] > (E|X|)^2.
inline ContradictionReport contradiction_probe_means(const MomentSummary& ms, double alpha = 0.5,
                                                     std::optional<double> abs_mean = std::nullopt,
                                                     double tol = kConsistencyTol) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("contradiction_probe_means: alpha must lie in (0, 1)");
    ContradictionReport rep;
    rep.alpha = alpha;
    const double w = 2.0 * alpha * (1.0 - alpha);
    rep.lhs = w * ms.var_bar;
    rep.abs_mean_bound = abs_mean.value_or(std::sqrt(std::max(ms.var_bar, 0.0)));

    if (std::abs(ms.mu_bar - ms.mu_low) > tol) {
        rep.branch = ContradictionBranch::MeansDiffer;
        rep.f_forced = 1.0 - alpha;
        // Plugging f(-alpha) = 1 - alpha back into the upper-mean identity.
        rep.symmetric_means = std::abs(mean_upper(-alpha, rep.f_forced, ms, ms) - ms.mu_bar) <= tol &&
                              std::abs(mean_lower(-alpha, rep.f_forced, ms, ms) - ms.mu_low) <= tol;
        rep.rhs = w * rep.abs_mean_bound * rep.abs_mean_bound;
        rep.contradiction = true;
    } else if (std::abs(ms.mu_bar) > tol) {
        rep.branch = ContradictionBranch::MeansEqualNonzero;
        rep.f_forced = 1.0 - alpha;
        rep.symmetric_means = false;
        rep.rhs = w * ms.mu_bar * ms.mu_bar;
        rep.contradiction = true;
    }
    return rep;
}

}  // namespace gexp
