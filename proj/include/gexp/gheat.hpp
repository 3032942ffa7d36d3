#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gexp/error.hpp"
#include "gexp/test_function.hpp"

namespace gexp {

/// The generator G(a) = 1/2 sup_{s^2 in [sigma_low^2, sigma_bar^2]} s^2 a
/// of a one-dimensional G-normal law.
class GFunction1D {
public:
    GFunction1D(double sigma_low, double sigma_bar) : sigma_low_(sigma_low), sigma_bar_(sigma_bar) {
        if (!std::isfinite(sigma_low) || !std::isfinite(sigma_bar) || sigma_low < 0.0 ||
            sigma_low > sigma_bar || !(sigma_bar > 0.0)) {
            std::ostringstream os;
            os << "GFunction1D: need 0 <= sigma_low <= sigma_bar, sigma_bar > 0 (got " << sigma_low
               << ", " << sigma_bar << ")";
            throw ValidationError(os.str());
        }
    }

    double sigma_low() const { return sigma_low_; }
    double sigma_bar() const { return sigma_bar_; }
    double var_low() const { return sigma_low_ * sigma_low_; }
    double var_bar() const { return sigma_bar_ * sigma_bar_; }

    /// Volatilities multiplied by |s|; s must be nonzero.
    GFunction1D scaled(double s) const {
        return {std::abs(s) * sigma_low_, std::abs(s) * sigma_bar_};
    }

    friend bool operator==(const GFunction1D&, const GFunction1D&) = default;

private:
    double sigma_low_;
    double sigma_bar_;
};

inline double g_apply(const GFunction1D& g, double a) {
    return 0.5 * (g.var_bar() * std::max(a, 0.0) - g.var_low() * std::max(-a, 0.0));
}

/// Uniform space grid plus time horizon for the explicit scheme.
struct Grid {
    double x_min = -8.0;
    double x_max = 8.0;
    int n_points = 401;
    double t_final = 1.0;
    double cfl_fraction = 0.4;

    double dx() const { return (x_max - x_min) / (n_points - 1); }
    double node(int i) const { return x_min + i * dx(); }

    /// Index of the node at x = 0.
    int zero_index() const { return static_cast<int>(std::lround(-x_min / dx())); }

    void validate() const {
        if (n_points < 3 || n_points % 2 == 0)
            throw ValidationError("Grid: n_points must be odd and >= 3");
        if (!(x_min < 0.0 && 0.0 < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max))
            throw ValidationError("Grid: need x_min < 0 < x_max");
        if (!(t_final > 0.0) || !std::isfinite(t_final))
            throw ValidationError("Grid: t_final must be positive");
        if (!(cfl_fraction > 0.0 && cfl_fraction <= 0.5))
            throw ValidationError("Grid: cfl_fraction must lie in (0, 0.5]");
        const int z = zero_index();
        if (z <= 0 || z >= n_points - 1 || std::abs(node(z)) > 1e-9 * dx())
            throw ValidationError("Grid: x = 0 must be an interior node");
    }

    /// Number of forward-Euler steps: the smallest count whose step keeps
    /// dt * sigma_bar^2 / dx^2 <= cfl_fraction while landing on t_final.
    long time_steps(const GFunction1D& g) const {
        const double dt_max = cfl_fraction * dx() * dx() / g.var_bar();
        return std::max(1L, static_cast<long>(std::ceil(t_final / dt_max - 1e-9)));
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Default solver grid for a law with upper volatility sigma_bar observed at time t:
/// symmetric domain of +-half_width_sigmas * sigma_bar * sqrt(t).
inline Grid default_grid(const GFunction1D& g, double t_final = 1.0, int n_points = 401,
                         double cfl_fraction = 0.4, double half_width_sigmas = 8.0) {
    const double half = half_width_sigmas * g.sigma_bar() * std::sqrt(t_final);
    Grid grid{-half, half, n_points, t_final, cfl_fraction};
    grid.validate();
    return grid;
}

/// Samples of u(t, .) on the nodes of a grid.
class GridFunction {
public:
    GridFunction(Grid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != grid_.n_points)
            throw ValidationError("GridFunction: value count does not match grid");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                std::ostringstream os;
                os.precision(17);
                os << "GridFunction: non-finite value at x = " << grid_.node(static_cast<int>(i));
                throw EvaluationError(os.str());
            }
        }
    }

    static GridFunction sample(const Grid& grid, const TestFunction& phi) {
        std::vector<double> v(grid.n_points);
        for (int i = 0; i < grid.n_points; ++i) {
            v[i] = phi(grid.node(i));
            if (!std::isfinite(v[i])) {
                std::ostringstream os;
                os.precision(17);
                os << "sample: " << phi.name() << " is not finite at node x = " << grid.node(i);
                throw EvaluationError(os.str());
            }
        }
        return {grid, std::move(v)};
    }

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

    double at_zero() const { return values_[grid_.zero_index()]; }

    /// Piecewise-linear interpolation; throws CoverageError outside [x_min, x_max].
    double interpolate(double x) const {
        const double span = grid_.x_max - grid_.x_min;
        const double slack = 1e-12 * span;
        if (!(x >= grid_.x_min - slack && x <= grid_.x_max + slack)) {
            std::ostringstream os;
            os.precision(17);
            os << "interpolate: x = " << x << " outside grid [" << grid_.x_min << ", "
               << grid_.x_max << "]";
            throw CoverageError(os.str());
        }
        const double s = std::clamp((x - grid_.x_min) / grid_.dx(), 0.0,
                                    static_cast<double>(grid_.n_points - 1));
        const auto i = std::min(static_cast<std::size_t>(s), values_.size() - 2);
        const double w = s - static_cast<double>(i);
        return (1.0 - w) * values_[i] + w * values_[i + 1];
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Forward-Euler solve of u_t = G(u_xx), u(0, .) = initial, up to grid.t_final.
///
/// Interior nodes: u_i += dt * G((u_{i+1} - 2u_i + u_{i-1}) / dx^2). Boundary
/// nodes take a zero second difference, i.e. they keep their initial value.
/// With dt * sigma_bar^2 / dx^2 <= 1/2 every update is a monotone combination
/// of neighbouring values.
inline GridFunction solve_gheat(const GFunction1D& g, const GridFunction& initial) {
    const Grid& grid = initial.grid();
    grid.validate();
    const long steps = grid.time_steps(g);
    const double dt = grid.t_final / static_cast<double>(steps);
    const double r = dt / (grid.dx() * grid.dx());
    const double up = 0.5 * r * g.var_bar();
    const double down = 0.5 * r * g.var_low();

    std::vector<double> u = initial.values();
    std::vector<double> next(u.size());
    const std::size_t n = u.size();
    for (long step = 0; step < steps; ++step) {
        next[0] = u[0];
        next[n - 1] = u[n - 1];
        double check = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double d2 = u[i + 1] - 2.0 * u[i] + u[i - 1];
            next[i] = u[i] + (d2 > 0.0 ? up : down) * d2;
            check += next[i];
        }
        if (!std::isfinite(check)) {
            throw DivergenceError("solve_gheat: non-finite value at step " + std::to_string(step + 1) +
                                  " of " + std::to_string(steps));
        }
        u.swap(next);
    }
    return {grid, std::move(u)};
}

inline GridFunction solve_gheat(const GFunction1D& g, const TestFunction& phi, const Grid& grid) {
    grid.validate();
    return solve_gheat(g, GridFunction::sample(grid, phi));
}

/// E[phi(sqrt(t) X)] for X G-normal with generator g, read off u(t, 0).
inline double gexpect(const GFunction1D& g, const TestFunction& phi, const Grid& grid) {
    return solve_gheat(g, phi, grid).at_zero();
}

/// Independent check of gexpect by dynamic programming on a recombining
/// trinomial lattice.
///
/// Spacing h = sigma_bar * sqrt(t / n_steps). A step with volatility s moves
/// +-h with probability p = s^2 / (2 sigma_bar^2) each, so its variance is
/// exactly s^2 dt. Each node keeps the larger of the two continuation values
/// for s in {sigma_low, sigma_bar}.
inline double dp_oracle(const GFunction1D& g, const TestFunction& phi, double t, int n_steps) {
    if (n_steps < 1) throw ValidationError("dp_oracle: n_steps must be >= 1");
    if (!(t > 0.0)) throw ValidationError("dp_oracle: t must be positive");
    const double h = g.sigma_bar() * std::sqrt(t / n_steps);
    const double p_bar = 0.5;
    const double p_low = 0.5 * g.var_low() / g.var_bar();
    if (!(p_low >= 0.0 && p_low <= 1.0) || 1.0 - 2.0 * p_low < 0.0)
        throw ConsistencyError("dp_oracle: lattice probability outside [0, 1]");

    const auto n = static_cast<std::size_t>(n_steps);
    std::vector<double> v(2 * n + 1);
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double x = (static_cast<double>(j) - static_cast<double>(n)) * h;
        v[j] = phi(x);
        if (!std::isfinite(v[j])) {
            std::ostringstream os;
            os.precision(17);
            os << "dp_oracle: " << phi.name() << " is not finite at x = " << x;
            throw EvaluationError(os.str());
        }
    }
    std::vector<double> next(v.size());
    // After processing level k the live nodes are j in [n - k, n + k].
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = n - k; j <= n + k; ++j) {
            const double d2 = v[j + 1] - 2.0 * v[j] + v[j - 1];
            next[j] = v[j] + (d2 > 0.0 ? p_bar : p_low) * d2;
        }
        for (std::size_t j = n - k; j <= n + k; ++j) v[j] = next[j];
    }
    return v[n];
}

}  // namespace gexp
