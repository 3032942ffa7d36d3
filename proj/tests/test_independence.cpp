#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gexp/distribution.hpp"
#include "gexp/independence.hpp"
#include "support/oracles.hpp"

using namespace gexp;

namespace {

const auto kX = gnormal(0.5, 1.0);

/// Nested expectation with both layers computed by the trinomial DP oracle.
double nested_dp(const GFunction1D& outer, const GFunction1D& inner,
                 const std::function<double(double, double)>& phi2, int n) {
    const TestFunction psi("psi", [&](double x) {
        return dp_oracle(inner, TestFunction("sec", [&](double y) { return phi2(x, y); }), 1.0, n);
    });
    return dp_oracle(outer, psi, 1.0, n);
}

}  // namespace

TEST(Compose, SumHasZeroMean) {
    const auto phi2 = BivariateFunction::linear_form(phi::identity(), 1.0, 1.0);
    EXPECT_NEAR(compose(kX, kX, phi2), 0.0, 1e-3);
}

TEST(Compose, SquareOfSumAddsUpperVariances) {
    const auto phi2 = BivariateFunction::linear_form(phi::square(), 1.0, 1.0);
    EXPECT_NEAR(compose(kX, kX, phi2), 2.0, 5e-3);
    // Same value through the generic point-by-point path.
    const auto generic =
        BivariateFunction::general("(x+y)^2", [](double x, double y) { return (x + y) * (x + y); });
    EXPECT_NEAR(compose(kX, kX, generic), 2.0, 5e-3);
}

TEST(Compose, FunctionOfXOnly) {
    const auto f = phi::hat(0.5, 1.0);
    EXPECT_NEAR(compose(kX, gnormal(0.25, 2.0), BivariateFunction::of_x(f)), dist_expect(kX, f), 1e-10);
}

TEST(Compose, PointMassReducesToSingleExpectation) {
    const auto f = phi::sigmoid_step(0.3, 0.5);
    const auto phi2 = BivariateFunction::linear_form(f, 0.7, 1.3);
    // Y a point mass at 0.4: E[f(0.7 X + 0.52)].
    EXPECT_NEAR(compose(kX, point_mass(0.4), phi2), dist_expect(kX, f.precomposed(0.7, 1.3 * 0.4)), 1e-10);
    // X a point mass at -1.1: E[f(-0.77 + 1.3 Y)].
    EXPECT_NEAR(compose(point_mass(-1.1), kX, phi2), dist_expect(kX, f.precomposed(1.3, -0.77)), 1e-10);
}

TEST(Compose, CoverageErrorOutsideInnerGrid) {
    const auto phi2 = BivariateFunction::linear_form(phi::tanh_fn(), 1.0, 1.0);
    const auto psi = inner_expectation(kX, phi2, {-1.0, 1.0}, true);
    EXPECT_NO_THROW(psi(0.5));
    EXPECT_THROW(psi(100.0), CoverageError);
}

TEST(CombLaw, LambdaOneIsX) {
    const auto fam = phi::canonical_family(1.0);
    EXPECT_LE(dist_distance(comb_law(kX, kX, 1.0, 0.0), kX, fam), 5e-3);
}

TEST(CombLaw, LambdaZeroIsY) {
    const auto y = gnormal(0.25, 0.5);
    const auto fam = phi::canonical_family(1.0);
    EXPECT_LE(dist_distance(comb_law(kX, y, 0.0, 1.0), y, fam), 5e-3);
}

TEST(CombLaw, GNormalStability) {
    const double c = 1.0 / std::sqrt(2.0);
    const auto fam = phi::canonical_family(1.0);
    EXPECT_LE(dist_distance(comb_law(kX, kX, c, c), kX, fam), 5e-3);
}

TEST(CombLaw, RejectsNegativeF) {
    EXPECT_THROW(comb_law(kX, kX, 0.5, -0.1), ValidationError);
}

TEST(CombLaw, ScenarioBackendsMatchEnumeration) {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> lam_dist(-1.5, 1.5);
    std::uniform_real_distribution<double> f_dist(0.0, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto sx = oracle::random_scenario(rng);
        const auto sy = oracle::random_scenario(rng);
        const double lam = lam_dist(rng), f = f_dist(rng);
        const auto law = comb_law(SublinearDistribution(sx), SublinearDistribution(sy), lam, f);
        for (const auto& phi : {phi::square(), phi::hat(0.0, 1.0), phi::tanh_fn(), phi::identity()}) {
            const double want = oracle::nested_enumeration(
                sx, sy, [&](double x, double y) { return phi(lam * x + f * y); });
            EXPECT_NEAR(dist_expect(law, phi), want, 1e-12);
        }
    }
}

TEST(CombLaw, ComposedFunctionalIsSublinear) {
    const auto law = comb_law(kX, gnormal(0.25, 0.75), 0.6, 0.9);
    const auto a = phi::hat(0.0, 1.0);
    const auto b = pointwise_max(a, phi::sigmoid_step(0.5, 0.5));
    const double ea = dist_expect(law, a);
    EXPECT_LE(ea, dist_expect(law, b) + 1e-12);
    EXPECT_NEAR(dist_expect(law, phi::constant(1.3)), 1.3, 1e-12);
    EXPECT_NEAR(dist_expect(law, a.scaled(2.5)), 2.5 * ea, 1e-10);
}

TEST(OrderProbe, SeparableFunctionIsSymmetric) {
    const auto phi2 = BivariateFunction::linear_form(phi::identity(), 1.0, 1.0);
    const auto [xy, yx] = order_asymmetry_probe(kX, gnormal(0.25, 0.5), phi2);
    EXPECT_NEAR(xy, yx, 1e-3);
}

TEST(OrderProbe, PointMassOrdersAgreeExactly) {
    const auto phi2 = BivariateFunction::general("x y^2", [](double x, double y) { return x * y * y; });
    const auto [xy, yx] = order_asymmetry_probe(kX, point_mass(0.7), phi2);
    EXPECT_EQ(xy, yx);
}

TEST(OrderProbe, ProductWithSquareMatchesNestedDp) {
    const auto phi2 = BivariateFunction::general("x y^2", [](double x, double y) { return x * y * y; });
    const auto [xy, yx] = order_asymmetry_probe(kX, kX, phi2);
    const GFunction1D g(0.5, 1.0);
    auto f = [](double x, double y) { return x * y * y; };
    auto f_swapped = [](double y, double x) { return x * y * y; };
    const double dp_xy = nested_dp(g, g, f, 300);
    const double dp_yx = nested_dp(g, g, f_swapped, 300);
    EXPECT_NEAR(xy, dp_xy, 1e-2);
    EXPECT_NEAR(yx, dp_yx, 1e-2);
    // Inner E[x Y^2] = x^+ - 0.25 x^-; its outer value is 0.75 E[N(0,1)^+].
    EXPECT_NEAR(xy, 0.75 / std::sqrt(2.0 * M_PI), 2e-3);
    // Other order: inner E[X y^2] = 0.
    EXPECT_NEAR(yx, 0.0, 1e-9);
}
