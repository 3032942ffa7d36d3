#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gexp/error.hpp"
#include "gexp/test_function.hpp"

namespace gexp {

/// Tolerance for identities that hold exactly in exact arithmetic.
inline constexpr double kAlgebraicTol = 1e-12;
/// Tolerance for quantities derived through several numerical steps.
inline constexpr double kConsistencyTol = 1e-9;

struct Atom {
    double value;
    double weight;
};

using DiscreteMeasure = std::vector<Atom>;

/// A finite set of discrete probability measures. The upper expectation is
/// the largest of the linear expectations, which makes it sublinear.
class ScenarioSet {
public:
    explicit ScenarioSet(std::vector<DiscreteMeasure> measures) : measures_(std::move(measures)) {
        validate();
    }

    static ScenarioSet point_mass(double x) { return ScenarioSet({{{x, 1.0}}}); }

    const std::vector<DiscreteMeasure>& measures() const { return measures_; }

    double min_atom() const {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& m : measures_)
            for (const auto& a : m) lo = std::min(lo, a.value);
        return lo;
    }

    double max_atom() const {
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& m : measures_)
            for (const auto& a : m) hi = std::max(hi, a.value);
        return hi;
    }

    /// Law of scale * X + shift.
    ScenarioSet affine(double scale, double shift) const {
        auto out = measures_;
        for (auto& m : out)
            for (auto& a : m) a.value = scale * a.value + shift;
        return ScenarioSet(std::move(out));
    }

private:
    void validate() const {
        if (measures_.empty()) throw ValidationError("ScenarioSet: at least one measure required");
        for (std::size_t k = 0; k < measures_.size(); ++k) {
            const auto& m = measures_[k];
            if (m.empty())
                throw ValidationError("ScenarioSet: measure " + std::to_string(k) + " has no atoms");
            double total = 0.0;
            for (const auto& a : m) {
                if (!std::isfinite(a.value))
                    throw ValidationError("ScenarioSet: non-finite atom in measure " +
                                          std::to_string(k));
                if (!(a.weight >= 0.0) || !std::isfinite(a.weight))
                    throw ValidationError("ScenarioSet: negative or non-finite weight in measure " +
                                          std::to_string(k));
                total += a.weight;
            }
            if (std::abs(total - 1.0) > kAlgebraicTol) {
                std::ostringstream os;
                os.precision(17);
                os << "ScenarioSet: weights of measure " << k << " sum to " << total;
                throw ValidationError(os.str());
            }
        }
    }

    std::vector<DiscreteMeasure> measures_;
};

namespace detail {

inline double linear_expect(const DiscreteMeasure& m, const TestFunction& phi) {
    double sum = 0.0;
    for (const auto& a : m) {
        const double v = phi(a.value);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os.precision(17);
            os << "expect: " << phi.name() << " is not finite at atom x = " << a.value;
            throw EvaluationError(os.str());
        }
        sum += a.weight * v;
    }
    return sum;
}

}  // namespace detail

/// Upper expectation: max over measures of sum_i w_i phi(x_i).
inline double expect(const ScenarioSet& dist, const TestFunction& phi) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : dist.measures()) best = std::max(best, detail::linear_expect(m, phi));
    return best;
}

/// Lower expectation -E[-phi].
inline double lower_expect(const ScenarioSet& dist, const TestFunction& phi) {
    return -expect(dist, phi.negated());
}

/// Upper and lower mean and second moment of a law.
struct MomentSummary {
    double mu_bar = 0.0;
    double mu_low = 0.0;
    double var_bar = 0.0;
    double var_low = 0.0;
};

/// Moments from any expectation functional `e(phi)`.
///
/// Quadratic test functions fall outside the bounded Lipschitz class; every
/// backend here accepts them (finite values on its evaluation set), which is
/// the usual extension of the test class to polynomial growth.
template <class Expectation>
MomentSummary moment_summary_of(const Expectation& e) {
    MomentSummary ms;
    ms.mu_bar = e(phi::identity());
    ms.mu_low = -e(phi::identity().negated());
    ms.var_bar = e(phi::square());
    ms.var_low = -e(phi::square().negated());

    const auto scale = [](double a, double b) { return 1.0 + std::max(std::abs(a), std::abs(b)); };
    if (ms.mu_low > ms.mu_bar + kConsistencyTol * scale(ms.mu_low, ms.mu_bar) ||
        ms.var_low < -kConsistencyTol * scale(ms.var_low, 0.0) ||
        ms.var_low > ms.var_bar + kConsistencyTol * scale(ms.var_low, ms.var_bar)) {
        std::ostringstream os;
        os.precision(17);
        os << "moment_summary: inconsistent moments (" << ms.mu_bar << ", " << ms.mu_low << ", "
           << ms.var_bar << ", " << ms.var_low << ")";
        throw ConsistencyError(os.str());
    }
    // Round-off within tolerance is snapped so the invariants hold exactly.
    ms.mu_low = std::min(ms.mu_low, ms.mu_bar);
    ms.var_low = std::clamp(ms.var_low, 0.0, ms.var_bar);
    return ms;
}

/// True iff E[X^2] <= (E[|X|])^2 + 1e-9; the non-degenerate laws are the others.
template <class Expectation>
bool is_degenerate_of(const Expectation& e) {
    const double second = e(phi::square());
    const double first_abs = e(phi::absolute());
    return second <= first_abs * first_abs + kConsistencyTol;
}

inline MomentSummary moment_summary(const ScenarioSet& dist) {
    return moment_summary_of([&](const TestFunction& f) { return expect(dist, f); });
}

inline bool is_degenerate(const ScenarioSet& dist) {
    return is_degenerate_of([&](const TestFunction& f) { return expect(dist, f); });
}

}  // namespace gexp
