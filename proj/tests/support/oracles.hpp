#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the solver or the composition code it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gexp/sublinear.hpp"
#include "gexp/test_function.hpp"

namespace gexp::oracle {

/// Classical E[phi(m + s Z)], Z standard normal, by Gauss-Kronrod on
/// [-12 s, 12 s] split into pieces of width s/20 (kinks at multiples of
/// s/20 fall on piece boundaries).
inline double gaussian_expectation(const std::function<double(double)>& phi, double s, double m = 0.0) {
    if (s == 0.0) return phi(m);
    using boost::math::quadrature::gauss_kronrod;
    const double inv = 1.0 / (s * std::sqrt(2.0 * boost::math::constants::pi<double>()));
    auto integrand = [&](double x) { return phi(m + x) * inv * std::exp(-0.5 * x * x / (s * s)); };
    const int pieces = 480;
    const double width = 24.0 * s / pieces;
    double total = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const double a = -12.0 * s + k * width;
        total += gauss_kronrod<double, 61>::integrate(integrand, a, a + width, 0, 0.0);
    }
    return total;
}

inline double gaussian_expectation(const TestFunction& phi, double s, double m = 0.0) {
    return gaussian_expectation([&](double x) { return phi(x); }, s, m);
}

/// sup over measures of X of sum_x w_x [sup over measures of Y of sum_y w_y phi(x, y)].
inline double nested_enumeration(const ScenarioSet& x, const ScenarioSet& y,
                                 const std::function<double(double, double)>& phi) {
    double outer_best = -std::numeric_limits<double>::infinity();
    for (const auto& mx : x.measures()) {
        double outer = 0.0;
        for (const auto& ax : mx) {
            double inner_best = -std::numeric_limits<double>::infinity();
            for (const auto& my : y.measures()) {
                double inner = 0.0;
                for (const auto& ay : my) inner += ay.weight * phi(ax.value, ay.value);
                inner_best = std::max(inner_best, inner);
            }
            outer += ax.weight * inner_best;
        }
        outer_best = std::max(outer_best, outer);
    }
    return outer_best;
}

inline double enumerate_expect(const ScenarioSet& x, const std::function<double(double)>& phi) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : x.measures()) {
        double s = 0.0;
        for (const auto& a : m) s += a.weight * phi(a.value);
        best = std::max(best, s);
    }
    return best;
}

inline std::vector<DiscreteMeasure> random_measures(std::mt19937_64& rng, int max_measures = 4,
                                                    int max_atoms = 5, double spread = 3.0) {
    std::uniform_int_distribution<int> n_measures(1, max_measures);
    std::uniform_int_distribution<int> n_atoms(1, max_atoms);
    std::uniform_real_distribution<double> value(-spread, spread);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::vector<DiscreteMeasure> out(n_measures(rng));
    for (auto& m : out) {
        m.resize(n_atoms(rng));
        double total = 0.0;
        for (auto& a : m) {
            a.value = value(rng);
            a.weight = weight(rng);
            total += a.weight;
        }
        for (auto& a : m) a.weight /= total;
    }
    return out;
}

inline ScenarioSet random_scenario(std::mt19937_64& rng, int max_measures = 4, int max_atoms = 5,
                                   double spread = 3.0) {
    return ScenarioSet(random_measures(rng, max_measures, max_atoms, spread));
}

/// Random continuous function of moderate size: a sin(bx + c) + d x + e |x - s|.
inline TestFunction random_function(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng), e = u(rng), s = u(rng);
    return TestFunction("rand", [=](double x) {
        return a * std::sin(b * x + c) + d * x + e * std::abs(x - s);
    });
}

}  // namespace gexp::oracle
