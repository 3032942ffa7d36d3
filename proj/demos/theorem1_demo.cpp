// Scans lambda X + sqrt(1 - lambda^2) Y for a G-normal X and prints the
// per-lambda deviation from the law of X, then the same scan with the
// wrong coefficient 1 - |lambda|.
#include <cmath>
#include <cstdio>

#include "gexp/gexp.hpp"

int main() {
    using namespace gexp;
    const auto x = gnormal(0.5, 1.0);
    const auto family = phi::canonical_family(1.0);
    const auto grid = default_lambda_grid();

    const auto good = invariance_scan(x, x, [](double l) { return std::sqrt(1.0 - l * l); }, grid, family,
                                      ReferenceKind::X);
    const auto bad = invariance_scan(x, x, [](double l) { return 1.0 - std::abs(l); }, grid, family,
                                     ReferenceKind::X);

    std::printf("%8s  %14s  %14s\n", "lambda", "sqrt(1-l^2)", "1-|l|");
    for (std::size_t i = 0; i < good.lambdas.size(); ++i)
        std::printf("%8.3f  %14.6e  %14.6e\n", good.lambdas[i], good.deviations[i], bad.deviations[i]);
    std::printf("max       %14.6e  %14.6e\n", good.max_deviation, bad.max_deviation);
    return 0;
}
