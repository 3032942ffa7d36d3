#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gexp/sublinear.hpp"
#include "gexp/test_function.hpp"

namespace gexp {

enum class Axiom { Monotonicity, ConstantPreservation, SubAdditivity, PositiveHomogeneity };

inline const char* to_string(Axiom a) {
    switch (a) {
        case Axiom::Monotonicity: return "monotonicity";
        case Axiom::ConstantPreservation: return "constant_preservation";
        case Axiom::SubAdditivity: return "sub_additivity";
        case Axiom::PositiveHomogeneity: return "positive_homogeneity";
    }
    return "unknown";
}

struct AxiomViolation {
    Axiom axiom;
    std::string detail;
    double excess;  // amount by which the inequality or identity fails
};

/// Checks the four sublinear-expectation axioms on sampled inputs.
///
/// `e` is any functional TestFunction -> double. Pairs are drawn from
/// `phis`; `points` supply both the constants c (for E[c] = c) and the
/// factors |c| (for E[|c| phi] = |c| E[phi]). Monotonicity is checked on
/// the ordered pairs (phi_i, max(phi_i, phi_j)).
template <class Expectation>
std::vector<AxiomViolation> check_axioms_of(const Expectation& e, std::span<const TestFunction> phis,
                                            std::span<const double> points,
                                            double tol = 1e-10) {
    std::vector<AxiomViolation> out;
    auto report = [&](Axiom a, const std::string& what, double excess) {
        std::ostringstream os;
        os.precision(17);
        os << what << " (excess " << excess << ")";
        out.push_back({a, os.str(), excess});
    };

    std::vector<double> values;
    values.reserve(phis.size());
    for (const auto& f : phis) values.push_back(e(f));

    for (double c : points) {
        const double got = e(phi::constant(c));
        const double err = std::abs(got - c);
        if (err > tol * (1.0 + std::abs(c)))
            report(Axiom::ConstantPreservation, "E[" + std::to_string(c) + "]", err);
    }

    for (std::size_t i = 0; i < phis.size(); ++i) {
        for (double c : points) {
            const double lam = std::abs(c);
            const double got = e(phis[i].scaled(lam));
            const double want = lam * values[i];
            const double err = std::abs(got - want);
            if (err > tol * (1.0 + std::abs(want)))
                report(Axiom::PositiveHomogeneity,
                       "E[" + std::to_string(lam) + " * " + phis[i].name() + "]", err);
        }
        for (std::size_t j = 0; j < phis.size(); ++j) {
            const double upper = e(pointwise_max(phis[i], phis[j]));
            const double mono = values[i] - upper;
            if (mono > tol * (1.0 + std::abs(upper)))
                report(Axiom::Monotonicity,
                       phis[i].name() + " <= max(" + phis[i].name() + ", " + phis[j].name() + ")",
                       mono);
            if (j < i) continue;
            const double sum = e(phis[i] + phis[j]);
            const double sub = sum - (values[i] + values[j]);
            if (sub > tol * (1.0 + std::abs(sum)))
                report(Axiom::SubAdditivity, phis[i].name() + " + " + phis[j].name(), sub);
        }
    }
    return out;
}

inline std::vector<AxiomViolation> check_axioms(const ScenarioSet& dist,
                                                std::span<const TestFunction> phis,
                                                std::span<const double> points,
                                                double tol = 1e-10) {
    return check_axioms_of([&](const TestFunction& f) { return expect(dist, f); }, phis, points,
                           tol);
}

}  // namespace gexp
