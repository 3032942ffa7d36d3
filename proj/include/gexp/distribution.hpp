#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "gexp/error.hpp"
#include "gexp/gheat.hpp"
#include "gexp/sublinear.hpp"
#include "gexp/test_function.hpp"

namespace gexp {

/// Discretization used whenever a G-normal law is evaluated.
struct SolverSettings {
    int n_points = 401;
    double cfl_fraction = 0.4;
    double half_width_sigmas = 8.0;

    friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

/// Law of X + shift with X G-normal; E[phi] = u(1, 0) for the G-heat
/// equation started from phi(. + shift).
struct GNormal {
    GFunction1D g;
    double shift = 0.0;
    SolverSettings settings{};

    Grid grid() const {
        return default_grid(g, 1.0, settings.n_points, settings.cfl_fraction,
                            settings.half_width_sigmas);
    }
};

class SublinearDistribution;

/// A law defined by a computation rather than a closed backend, e.g. the law
/// of lambda X + f Y under nested expectation. Implementations are immutable.
class CompositeLaw {
public:
    virtual ~CompositeLaw() = default;
    virtual double expect(const TestFunction& phi) const = 0;
    /// Interval outside of which the law puts no (numerically relevant) mass.
    virtual std::pair<double, double> support() const = 0;
    virtual SublinearDistribution affine(double scale, double shift) const = 0;
    virtual std::string describe() const = 0;
};

/// A sublinear law, seen as the functional phi -> E[phi(X)].
class SublinearDistribution {
public:
    using Backend = std::variant<ScenarioSet, GNormal, std::shared_ptr<const CompositeLaw>>;

    SublinearDistribution(ScenarioSet s, std::optional<std::string> label = std::nullopt)
        : backend_(std::move(s)), label_(std::move(label)) {}

    SublinearDistribution(GNormal g, std::optional<std::string> label = std::nullopt)
        : backend_(std::move(g)), label_(std::move(label)) {
        std::get<GNormal>(backend_).grid();  // validates settings
    }

    SublinearDistribution(std::shared_ptr<const CompositeLaw> c,
                          std::optional<std::string> label = std::nullopt)
        : backend_(std::move(c)), label_(std::move(label)) {
        if (!std::get<2>(backend_)) throw ValidationError("SublinearDistribution: null composite");
    }

    const Backend& backend() const { return backend_; }
    const std::optional<std::string>& label() const { return label_; }

    const ScenarioSet* scenario() const { return std::get_if<ScenarioSet>(&backend_); }
    const GNormal* gnormal() const { return std::get_if<GNormal>(&backend_); }
    const CompositeLaw* composite() const {
        auto p = std::get_if<std::shared_ptr<const CompositeLaw>>(&backend_);
        return p ? p->get() : nullptr;
    }

    SublinearDistribution with_label(std::string label) const {
        auto copy = *this;
        copy.label_ = std::move(label);
        return copy;
    }

    std::string describe() const {
        if (label_) return *label_;
        if (auto s = scenario()) {
            return "scenario(" + std::to_string(s->measures().size()) + " measures)";
        }
        if (auto g = gnormal()) {
            return "gnormal(" + std::to_string(g->g.sigma_low()) + "," +
                   std::to_string(g->g.sigma_bar()) + ")" +
                   (g->shift != 0.0 ? "+" + std::to_string(g->shift) : "");
        }
        return composite()->describe();
    }

private:
    Backend backend_;
    std::optional<std::string> label_;
};

inline SublinearDistribution gnormal(double sigma_low, double sigma_bar, SolverSettings s = {}) {
    return SublinearDistribution(GNormal{GFunction1D(sigma_low, sigma_bar), 0.0, s});
}

inline SublinearDistribution point_mass(double x) {
    return SublinearDistribution(ScenarioSet::point_mass(x));
}

/// E[phi(X)] for the law d.
inline double dist_expect(const SublinearDistribution& d, const TestFunction& phi) {
    if (auto s = d.scenario()) return expect(*s, phi);
    if (auto g = d.gnormal()) {
        const auto& f = g->shift == 0.0 ? phi : phi.precomposed(1.0, g->shift);
        return gexpect(g->g, f, g->grid());
    }
    return d.composite()->expect(phi);
}

inline double dist_lower_expect(const SublinearDistribution& d, const TestFunction& phi) {
    return -dist_expect(d, phi.negated());
}

/// Interval carrying the law: atoms for scenario sets, the solver domain for
/// G-normal laws.
inline std::pair<double, double> support(const SublinearDistribution& d) {
    if (auto s = d.scenario()) return {s->min_atom(), s->max_atom()};
    if (auto g = d.gnormal()) {
        const Grid grid = g->grid();
        return {grid.x_min + g->shift, grid.x_max + g->shift};
    }
    return d.composite()->support();
}

/// Law of scale * X + shift. G-normal laws are symmetric, so only |scale|
/// enters their volatilities; scale = 0 collapses to a point mass.
inline SublinearDistribution affine_image(const SublinearDistribution& d, double scale,
                                          double shift) {
    if (!std::isfinite(scale) || !std::isfinite(shift))
        throw ValidationError("affine_image: scale and shift must be finite");
    if (auto s = d.scenario()) return SublinearDistribution(s->affine(scale, shift));
    if (auto g = d.gnormal()) {
        if (scale == 0.0) return point_mass(shift);
        return SublinearDistribution(GNormal{g->g.scaled(scale), scale * g->shift + shift,
                                             g->settings});
    }
    return d.composite()->affine(scale, shift);
}

/// max over the family of |E1[phi] - E2[phi]|.
inline double dist_distance(const SublinearDistribution& d1, const SublinearDistribution& d2,
                            std::span<const TestFunction> family) {
    if (family.empty()) throw ValidationError("dist_distance: empty test-function family");
    double worst = 0.0;
    for (const auto& f : family)
        worst = std::max(worst, std::abs(dist_expect(d1, f) - dist_expect(d2, f)));
    return worst;
}

inline MomentSummary moment_summary(const SublinearDistribution& d) {
    return moment_summary_of([&](const TestFunction& f) { return dist_expect(d, f); });
}

inline bool is_degenerate(const SublinearDistribution& d) {
    return is_degenerate_of([&](const TestFunction& f) { return dist_expect(d, f); });
}

/// Upper volatility scale used to size test-function families.
inline double law_scale(const SublinearDistribution& d) {
    if (auto g = d.gnormal()) return g->g.sigma_bar();
    const double second = dist_expect(d, phi::square());
    if (!(second > 0.0)) return 1.0;
    return std::sqrt(second);
}

}  // namespace gexp
