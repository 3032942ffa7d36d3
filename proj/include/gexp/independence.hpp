#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "gexp/distribution.hpp"
#include "gexp/error.hpp"
#include "gexp/gheat.hpp"
#include "gexp/test_function.hpp"

namespace gexp {

/// A test function of two variables phi(x, y).
///
/// Functions of the linear form h(alpha x + beta y) remember (h, alpha, beta):
/// for those the inner expectation over a G-normal Y is a single G-heat solve.
class BivariateFunction {
public:
    using Evaluator = std::function<double(double, double)>;

    struct LinearForm {
        TestFunction outer;
        double alpha;
        double beta;
    };

    static BivariateFunction general(std::string name, Evaluator f) {
        return BivariateFunction(std::move(name), std::make_shared<const Evaluator>(std::move(f)),
                                 std::nullopt);
    }

    /// (x, y) -> outer(alpha x + beta y)
    static BivariateFunction linear_form(TestFunction outer, double alpha, double beta) {
        auto h = outer;
        auto f = std::make_shared<const Evaluator>(
            [h, alpha, beta](double x, double y) { return h(alpha * x + beta * y); });
        std::ostringstream os;
        os << outer.name() << "(" << alpha << "x+" << beta << "y)";
        return BivariateFunction(os.str(), std::move(f),
                                 LinearForm{std::move(outer), alpha, beta});
    }

    /// (x, y) -> phi(x)
    static BivariateFunction of_x(TestFunction phi) { return linear_form(std::move(phi), 1.0, 0.0); }

    double operator()(double x, double y) const { return (*f_)(x, y); }
    const std::string& name() const { return name_; }
    const std::optional<LinearForm>& linear() const { return linear_; }

    /// (y, x) -> phi(x, y)
    BivariateFunction swapped() const {
        if (linear_) return linear_form(linear_->outer, linear_->beta, linear_->alpha);
        auto f = f_;
        return general("swap(" + name_ + ")", [f](double y, double x) { return (*f)(x, y); });
    }

    /// y -> phi(x, y) for fixed x.
    TestFunction section(double x) const {
        auto f = f_;
        return TestFunction(name_ + "|x=" + std::to_string(x), [f, x](double y) { return (*f)(x, y); });
    }

private:
    BivariateFunction(std::string name, std::shared_ptr<const Evaluator> f,
                      std::optional<LinearForm> linear)
        : name_(std::move(name)), f_(std::move(f)), linear_(std::move(linear)) {}

    std::string name_;
    std::shared_ptr<const Evaluator> f_;
    std::optional<LinearForm> linear_;
};

namespace detail {

/// Solves once for v(z) = E[h(z + beta Y)] on a grid wide enough that
/// alpha * x stays inside it for every x in x_range, keeping the node
/// spacing of the native grid of beta Y. Returns psi(x) = v(alpha x).
inline TestFunction inner_by_single_solve(const GNormal& y, const BivariateFunction::LinearForm& lf,
                                          std::pair<double, double> x_range) {
    const GNormal z{y.g.scaled(lf.beta), lf.beta * y.shift, y.settings};
    const Grid native = z.grid();
    const double reach = std::abs(lf.alpha) * std::max(std::abs(x_range.first), std::abs(x_range.second));
    const double half = reach + native.x_max;
    constexpr int kMaxNodes = 20001;
    int n = static_cast<int>(std::ceil(2.0 * half / native.dx())) + 1;
    n = std::clamp(n, native.n_points, kMaxNodes);
    if (n % 2 == 0) ++n;
    Grid grid{-half, half, n, 1.0, native.cfl_fraction};
    grid.validate();

    const TestFunction start = z.shift == 0.0 ? lf.outer : lf.outer.precomposed(1.0, z.shift);
    auto v = std::make_shared<const GridFunction>(solve_gheat(z.g, start, grid));
    const double alpha = lf.alpha;
    return TestFunction("E_Y[" + lf.outer.name() + "]",
                        [v, alpha](double x) { return v->interpolate(alpha * x); });
}

}  // namespace detail

/// psi(x) = E[phi(x, Y)], the inner half of the nested expectation.
/// `x_range` is the set of points at which psi will be queried.
inline TestFunction inner_expectation(const SublinearDistribution& dist_y,
                                      const BivariateFunction& phi2,
                                      std::pair<double, double> x_range, bool allow_single_solve) {
    const auto& lf = phi2.linear();
    if (lf && lf->beta == 0.0) return lf->outer.precomposed(lf->alpha, 0.0);
    if (lf && allow_single_solve) {
        if (auto g = dist_y.gnormal()) return detail::inner_by_single_solve(*g, *lf, x_range);
    }
    auto y = dist_y;
    auto f = phi2;
    return TestFunction("E_Y[" + phi2.name() + "]",
                        [y, f](double x) { return dist_expect(y, f.section(x)); });
}

/// Nested expectation E[E[phi(x, Y)]_{x = X}]: the law of (X, Y) with Y
/// independent of X.
///
/// When Y is G-normal, phi has the linear form and X is not a scenario set,
/// the inner function comes from one G-heat solve; otherwise it is evaluated
/// point by point at whatever points the outer expectation needs.
inline double compose(const SublinearDistribution& dist_x, const SublinearDistribution& dist_y,
                      const BivariateFunction& phi2) {
    const bool single_solve = dist_x.scenario() == nullptr;
    const TestFunction psi = inner_expectation(dist_y, phi2, support(dist_x), single_solve);
    return dist_expect(dist_x, psi);
}

/// Coefficients of lambda X + f Y with Y independent of X.
struct Combination {
    SublinearDistribution dist_x;
    SublinearDistribution dist_y;
    double lambda = 0.0;
    double f_lambda = 0.0;

    void validate() const {
        if (!std::isfinite(lambda)) throw ValidationError("Combination: lambda must be finite");
        if (!(f_lambda >= 0.0) || !std::isfinite(f_lambda))
            throw ValidationError("Combination: f(lambda) must be finite and >= 0");
    }
};

/// Law of lambda X + f Y + shift, evaluated by composition on every call.
class CombinedLaw final : public CompositeLaw {
public:
    explicit CombinedLaw(Combination c, double shift = 0.0) : c_(std::move(c)), shift_(shift) {
        c_.validate();
    }

    double expect(const TestFunction& phi) const override {
        const TestFunction outer = shift_ == 0.0 ? phi : phi.precomposed(1.0, shift_);
        return compose(c_.dist_x, c_.dist_y,
                       BivariateFunction::linear_form(outer, c_.lambda, c_.f_lambda));
    }

    std::pair<double, double> support() const override {
        const auto [xl, xh] = gexp::support(c_.dist_x);
        const auto [yl, yh] = gexp::support(c_.dist_y);
        const double a = c_.lambda * xl, b = c_.lambda * xh;
        return {std::min(a, b) + c_.f_lambda * yl + shift_,
                std::max(a, b) + c_.f_lambda * yh + shift_};
    }

    SublinearDistribution affine(double scale, double shift) const override {
        Combination c = c_;
        c.lambda = scale * c_.lambda;
        c.f_lambda = scale * c_.f_lambda;
        if (c.f_lambda < 0.0) {
            c.f_lambda = -c.f_lambda;
            c.dist_y = affine_image(c_.dist_y, -1.0, 0.0);
        }
        return SublinearDistribution(
            std::make_shared<const CombinedLaw>(std::move(c), scale * shift_ + shift));
    }

    std::string describe() const override {
        std::ostringstream os;
        os << c_.lambda << "*" << c_.dist_x.describe() << " + " << c_.f_lambda << "*"
           << c_.dist_y.describe();
        if (shift_ != 0.0) os << " + " << shift_;
        return os.str();
    }

    const Combination& combination() const { return c_; }

private:
    Combination c_;
    double shift_;
};

inline SublinearDistribution comb_law(const Combination& c) {
    return SublinearDistribution(std::make_shared<const CombinedLaw>(c));
}

inline SublinearDistribution comb_law(const SublinearDistribution& x, const SublinearDistribution& y,
                                      double lambda, double f_lambda) {
    return comb_law(Combination{x, y, lambda, f_lambda});
}

/// (E[phi(X, Y)] with Y independent of X, E[phi(X, Y)] with X independent of Y).
/// Sublinear independence is not symmetric, so the two can differ.
inline std::pair<double, double> order_asymmetry_probe(const SublinearDistribution& dist_x,
                                                       const SublinearDistribution& dist_y,
                                                       const BivariateFunction& phi2) {
    return {compose(dist_x, dist_y, phi2), compose(dist_y, dist_x, phi2.swapped())};
}

}  // namespace gexp
