#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gexp/error.hpp"

namespace gexp {

/// Shape information attached to a test function. Used for documentation
/// and for the convex/concave closed-form checks; the solvers never rely on it.
enum Tag : unsigned {
    kNoTag = 0u,
    kConvex = 1u << 0,
    kConcave = 1u << 1,
    kBounded = 1u << 2,
    kPolynomialGrowth = 1u << 3,
};

/// A real function phi used as the argument of an expectation E[phi(X)].
///
/// Value type: the evaluator is held by shared pointer to an immutable
/// std::function, so copies are cheap and safe to share across threads.
/// `lipschitz_bound()` returns nullopt when the function is not globally
/// Lipschitz (x^2 and friends).
class TestFunction {
public:
    using Evaluator = std::function<double(double)>;

    TestFunction(std::string name, Evaluator f,
                 std::optional<double> lipschitz = std::nullopt,
                 unsigned tags = kNoTag)
        : name_(std::move(name)),
          f_(std::make_shared<const Evaluator>(std::move(f))),
          lipschitz_(lipschitz),
          tags_(tags) {}

    double operator()(double x) const { return (*f_)(x); }

    const std::string& name() const { return name_; }
    std::optional<double> lipschitz_bound() const { return lipschitz_; }
    unsigned tags() const { return tags_; }
    bool has(Tag t) const { return (tags_ & t) != 0u; }
    bool is_bounded_lipschitz() const { return has(kBounded) && lipschitz_.has_value(); }

    /// x -> -phi(x)
    TestFunction negated() const {
        unsigned t = tags_ & ~(kConvex | kConcave);
        if (has(kConvex)) t |= kConcave;
        if (has(kConcave)) t |= kConvex;
        auto f = f_;
        return {"-(" + name_ + ")", [f](double x) { return -(*f)(x); }, lipschitz_, t};
    }

    /// x -> s * phi(x)
    TestFunction scaled(double s) const {
        if (s < 0.0) return negated().scaled(-s);
        auto f = f_;
        std::optional<double> lip;
        if (lipschitz_) lip = s * *lipschitz_;
        return {std::to_string(s) + "*(" + name_ + ")", [f, s](double x) { return s * (*f)(x); },
                lip, tags_};
    }

    /// x -> phi(x) + c
    TestFunction plus(double c) const {
        auto f = f_;
        return {"(" + name_ + ")+" + std::to_string(c), [f, c](double x) { return (*f)(x) + c; },
                lipschitz_, tags_};
    }

    /// x -> phi(scale * x + offset)
    TestFunction precomposed(double scale, double offset) const {
        auto f = f_;
        std::optional<double> lip;
        if (lipschitz_) lip = std::abs(scale) * *lipschitz_;
        unsigned t = tags_ & (kBounded | kPolynomialGrowth | kConvex | kConcave);
        return {name_ + "(" + std::to_string(scale) + "x+" + std::to_string(offset) + ")",
                [f, scale, offset](double x) { return (*f)(scale * x + offset); }, lip, t};
    }

    friend TestFunction operator+(const TestFunction& a, const TestFunction& b) {
        auto fa = a.f_;
        auto fb = b.f_;
        std::optional<double> lip;
        if (a.lipschitz_ && b.lipschitz_) lip = *a.lipschitz_ + *b.lipschitz_;
        unsigned t = a.tags_ & b.tags_ & (kConvex | kConcave | kBounded | kPolynomialGrowth);
        return {"(" + a.name_ + ")+(" + b.name_ + ")",
                [fa, fb](double x) { return (*fa)(x) + (*fb)(x); }, lip, t};
    }

    friend TestFunction pointwise_max(const TestFunction& a, const TestFunction& b) {
        auto fa = a.f_;
        auto fb = b.f_;
        std::optional<double> lip;
        if (a.lipschitz_ && b.lipschitz_) lip = std::max(*a.lipschitz_, *b.lipschitz_);
        unsigned t = a.tags_ & b.tags_ & (kConvex | kBounded | kPolynomialGrowth);
        return {"max(" + a.name_ + "," + b.name_ + ")",
                [fa, fb](double x) { return std::max((*fa)(x), (*fb)(x)); }, lip, t};
    }

private:
    std::string name_;
    std::shared_ptr<const Evaluator> f_;
    std::optional<double> lipschitz_;
    unsigned tags_;
};

/// Checks the convex/concave/bounded tags against midpoint inequalities on
/// the sampled points. Returns false on the first inconsistency.
inline bool tags_consistent(const TestFunction& phi, std::span<const double> points,
                            double tol = 1e-12) {
    for (double x : points) {
        if (!std::isfinite(phi(x))) return false;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double x = points[i], y = points[j];
            const double mid = phi(0.5 * (x + y));
            const double chord = 0.5 * (phi(x) + phi(y));
            const double scale = 1.0 + std::abs(chord);
            if (phi.has(kConvex) && mid > chord + tol * scale) return false;
            if (phi.has(kConcave) && mid < chord - tol * scale) return false;
            if (auto lip = phi.lipschitz_bound()) {
                if (std::abs(phi(x) - phi(y)) > *lip * std::abs(x - y) * (1.0 + tol) + tol)
                    return false;
            }
        }
    }
    return true;
}

namespace phi {

inline TestFunction constant(double c) {
    return {"const(" + std::to_string(c) + ")", [c](double) { return c; }, 0.0,
            kConvex | kConcave | kBounded | kPolynomialGrowth};
}

inline TestFunction identity() {
    return {"x", [](double x) { return x; }, 1.0, kConvex | kConcave | kPolynomialGrowth};
}

inline TestFunction square() {
    return {"x^2", [](double x) { return x * x; }, std::nullopt, kConvex | kPolynomialGrowth};
}

inline TestFunction absolute() {
    return {"|x|", [](double x) { return std::abs(x); }, 1.0, kConvex | kPolynomialGrowth};
}

/// Tent of unit slope: max(0, half_width - |x - center|).
inline TestFunction hat(double center, double half_width) {
    return {"hat(" + std::to_string(center) + "," + std::to_string(half_width) + ")",
            [center, half_width](double x) {
                return std::max(0.0, half_width - std::abs(x - center));
            },
            1.0, kBounded | kPolynomialGrowth};
}

/// Clipped 1 - |x|, the standard non-convex, non-concave bump.
inline TestFunction bump() {
    return {"bump", [](double x) { return std::max(0.0, 1.0 - std::abs(x)); }, 1.0,
            kBounded | kPolynomialGrowth};
}

inline TestFunction tanh_fn() {
    return {"tanh(x)", [](double x) { return std::tanh(x); }, 1.0, kBounded | kPolynomialGrowth};
}

/// 0.5 * (1 + tanh((x - center) / width))
inline TestFunction sigmoid_step(double center, double width) {
    return {"step(" + std::to_string(center) + "," + std::to_string(width) + ")",
            [center, width](double x) { return 0.5 * (1.0 + std::tanh((x - center) / width)); },
            0.5 / width, kBounded | kPolynomialGrowth};
}

inline TestFunction clipped_identity(double limit) {
    return {"clip(x," + std::to_string(limit) + ")",
            [limit](double x) { return std::clamp(x, -limit, limit); }, 1.0,
            kBounded | kPolynomialGrowth};
}

inline TestFunction clipped_square(double limit) {
    const double cap = limit * limit;
    return {"clip(x^2," + std::to_string(limit) + ")",
            [cap](double x) { return std::min(x * x, cap); }, 2.0 * limit,
            kBounded | kPolynomialGrowth};
}

inline TestFunction clipped_neg_square(double limit) {
    const double cap = limit * limit;
    return {"clip(-x^2," + std::to_string(limit) + ")",
            [cap](double x) { return -std::min(x * x, cap); }, 2.0 * limit,
            kBounded | kPolynomialGrowth};
}

inline TestFunction clipped_abs(double limit) {
    return {"clip(|x|," + std::to_string(limit) + ")",
            [limit](double x) { return std::min(std::abs(x), limit); }, 1.0,
            kBounded | kPolynomialGrowth};
}

/// Half-width of the clipping window, in units of the family scale.
inline constexpr double kFamilyClipSigmas = 8.0;

/// The bounded Lipschitz family used to compare laws. `scale` is the upper
/// volatility of the law under study; the hats and steps sit at multiples of it.
inline std::vector<TestFunction> canonical_family(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw ValidationError("canonical_family: scale must be positive and finite");
    const double clip = kFamilyClipSigmas * scale;
    std::vector<TestFunction> family{
        clipped_identity(clip),
        clipped_square(clip),
        clipped_neg_square(clip),
        clipped_abs(clip),
    };
    for (int k = -2; k <= 2; ++k) family.push_back(hat(k * scale, scale));
    family.push_back(tanh_fn());
    family.push_back(sigmoid_step(-scale, scale));
    family.push_back(sigmoid_step(scale, scale));
    return family;
}

/// Named functions for configuration files and the command line.
inline std::optional<TestFunction> by_name(const std::string& name) {
    if (name == "x") return identity();
    if (name == "x2") return square();
    if (name == "-x2") return square().negated();
    if (name == "abs") return absolute();
    if (name == "-abs") return absolute().negated();
    if (name == "bump") return bump();
    if (name == "tanh") return tanh_fn();
    if (name == "one") return constant(1.0);
    return std::nullopt;
}

inline std::vector<std::string> known_names() {
    return {"x", "x2", "-x2", "abs", "-abs", "bump", "tanh", "one"};
}

}  // namespace phi
}  // namespace gexp
