#pragma once

// Membership-function families. Parameter order follows the conventional
// toolbox layout for each family:
//
//   trimf    [a b c]          feet a, c; peak b
//   trapmf   [a b c d]        feet a, d; shoulders b, c
//   gbellmf  [a b c]          width a, slope b, centre c
//   gaussmf  [sigma c]
//   gauss2mf [sigma1 c1 sigma2 c2]  left gaussian below c1, right above c2
//   pimf     [a b c d]        s-curve a->b times z-curve c->d
//   dsigmf   [a1 c1 a2 c2]    |sig(a1,c1) - sig(a2,c2)|
//   psigmf   [a1 c1 a2 c2]    sig(a1,c1) * sig(a2,c2)

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcfollow/error.hpp"

namespace lcfollow {

enum class MfFamily { triangular, trapezoidal, generalized_bell, gaussian, gaussian_combination, pi_shaped, diff_sigmoid, prod_sigmoid };

inline constexpr std::array<MfFamily, 8> all_mf_families{
    MfFamily::triangular,   MfFamily::trapezoidal, MfFamily::generalized_bell, MfFamily::gaussian,
    MfFamily::gaussian_combination, MfFamily::pi_shaped, MfFamily::diff_sigmoid, MfFamily::prod_sigmoid};

/// Smallest admissible width-like parameter (sigma, bell width and slope).
inline constexpr double min_width = 1e-6;

inline constexpr std::string_view mf_family_name(MfFamily f)
{
    switch (f) {
    case MfFamily::triangular: return "trimf";
    case MfFamily::trapezoidal: return "trapmf";
    case MfFamily::generalized_bell: return "gbellmf";
    case MfFamily::gaussian: return "gaussmf";
    case MfFamily::gaussian_combination: return "gauss2mf";
    case MfFamily::pi_shaped: return "pimf";
    case MfFamily::diff_sigmoid: return "dsigmf";
    case MfFamily::prod_sigmoid: return "psigmf";
    }
    return "?";
}

inline std::optional<MfFamily> mf_family_from_name(std::string_view name)
{
    for (auto f : all_mf_families)
        if (mf_family_name(f) == name) return f;
    return std::nullopt;
}

inline constexpr std::size_t mf_arity(MfFamily f)
{
    switch (f) {
    case MfFamily::triangular:
    case MfFamily::generalized_bell: return 3;
    case MfFamily::gaussian: return 2;
    default: return 4;
    }
}

namespace detail {

inline double sigmoid(double slope, double centre, double x)
{
    const double z = slope * (x - centre);
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double gauss(double sigma, double centre, double x)
{
    const double u = (x - centre) / sigma;
    return std::exp(-0.5 * u * u);
}

// Rising s-curve from 0 at a to 1 at b.
inline double smf(double a, double b, double x)
{
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    const double mid = 0.5 * (a + b);
    const double w = b - a;
    if (x <= mid) {
        const double r = (x - a) / w;
        return 2.0 * r * r;
    }
    const double r = (x - b) / w;
    return 1.0 - 2.0 * r * r;
}

inline double zmf(double a, double b, double x) { return 1.0 - smf(a, b, x); }

inline bool non_decreasing(std::span<const double> p)
{
    return std::is_sorted(p.begin(), p.end());
}

}  // namespace detail

class MembershipFunction {
public:
    MembershipFunction() = default;

    /// Throws DataError when the parameters violate the family's invariants.
    MembershipFunction(MfFamily family, std::vector<double> params) : family_(family), params_(std::move(params))
    {
        if (auto problem = check(family_, params_)) throw DataError(*problem);
    }

    MfFamily family() const noexcept { return family_; }
    std::span<const double> params() const noexcept { return params_; }

    /// Description of the first violated invariant, if any.
    static std::optional<std::string> check(MfFamily family, std::span<const double> p)
    {
        const std::string name(mf_family_name(family));
        if (p.size() != mf_arity(family)) {
            return name + " expects " + std::to_string(mf_arity(family)) + " parameters, got " + std::to_string(p.size());
        }
        for (double v : p)
            if (!std::isfinite(v)) return name + " parameters must be finite";
        switch (family) {
        case MfFamily::triangular:
        case MfFamily::trapezoidal:
        case MfFamily::pi_shaped:
            if (!detail::non_decreasing(p)) return name + " breakpoints must be non-decreasing";
            break;
        case MfFamily::generalized_bell:
            if (p[0] <= 0 || p[1] <= 0) return "gbellmf requires a > 0 and b > 0";
            break;
        case MfFamily::gaussian:
            if (p[0] <= 0) return "gaussmf requires sigma > 0";
            break;
        case MfFamily::gaussian_combination:
            if (p[0] <= 0 || p[2] <= 0) return "gauss2mf requires sigma1 > 0 and sigma2 > 0";
            break;
        case MfFamily::diff_sigmoid:
        case MfFamily::prod_sigmoid:
            break;
        }
        return std::nullopt;
    }

    double operator()(double x) const { return evaluate(family_, params_, x); }

    /// Closed-form membership degree; parameters are assumed valid.
    static double evaluate(MfFamily family, std::span<const double> p, double x)
    {
        switch (family) {
        case MfFamily::triangular: {
            const double a = p[0], b = p[1], c = p[2];
            if (x < a || x > c) return 0.0;
            if (x <= b) return b > a ? (x - a) / (b - a) : 1.0;
            return c > b ? (c - x) / (c - b) : 1.0;
        }
        case MfFamily::trapezoidal: {
            const double a = p[0], b = p[1], c = p[2], d = p[3];
            if (x < a || x > d) return 0.0;
            if (x < b) return (x - a) / (b - a);
            if (x <= c) return 1.0;
            return (d - x) / (d - c);
        }
        case MfFamily::generalized_bell: {
            const double r = std::abs((x - p[2]) / p[0]);
            return 1.0 / (1.0 + std::pow(r, 2.0 * p[1]));
        }
        case MfFamily::gaussian: return detail::gauss(p[0], p[1], x);
        case MfFamily::gaussian_combination: {
            const double left = x < p[1] ? detail::gauss(p[0], p[1], x) : 1.0;
            const double right = x > p[3] ? detail::gauss(p[2], p[3], x) : 1.0;
            return left * right;
        }
        case MfFamily::pi_shaped: return detail::smf(p[0], p[1], x) * detail::zmf(p[2], p[3], x);
        case MfFamily::diff_sigmoid:
            return std::clamp(std::abs(detail::sigmoid(p[0], p[1], x) - detail::sigmoid(p[2], p[3], x)), 0.0, 1.0);
        case MfFamily::prod_sigmoid: return detail::sigmoid(p[0], p[1], x) * detail::sigmoid(p[2], p[3], x);
        }
        return 0.0;
    }

    /// Analytic d mu / d param for the gaussian family, in parameter order (sigma, c).
    static std::array<double, 2> gaussian_gradient(std::span<const double> p, double x)
    {
        const double sigma = p[0], c = p[1];
        const double mu = detail::gauss(sigma, c, x);
        const double dx = x - c;
        return {mu * dx * dx / (sigma * sigma * sigma), mu * dx / (sigma * sigma)};
    }

    /// Moves parameters back into the admissible region after an unconstrained update.
    static void project(MfFamily family, std::span<double> p)
    {
        switch (family) {
        case MfFamily::triangular:
        case MfFamily::trapezoidal:
        case MfFamily::pi_shaped: std::sort(p.begin(), p.end()); break;
        case MfFamily::generalized_bell:
            p[0] = std::max(p[0], min_width);
            p[1] = std::max(p[1], min_width);
            break;
        case MfFamily::gaussian: p[0] = std::max(p[0], min_width); break;
        case MfFamily::gaussian_combination:
            p[0] = std::max(p[0], min_width);
            p[2] = std::max(p[2], min_width);
            break;
        case MfFamily::diff_sigmoid:
        case MfFamily::prod_sigmoid: break;
        }
    }

    /// Parameters of member `index` of an evenly spaced partition of
    /// [lo, hi] into `count` overlapping sets.
    static MembershipFunction grid_member(MfFamily family, double lo, double hi, std::size_t count, std::size_t index)
    {
        const double span = hi - lo;
        const double h = count > 1 ? span / static_cast<double>(count - 1) : span;
        const double c = count > 1 ? lo + h * static_cast<double>(index) : 0.5 * (lo + hi);
        // gaussian half-width at half-maximum equals half the centre spacing
        const double sigma = h / (2.0 * std::sqrt(2.0 * std::log(2.0)));
        const double slope = 8.0 / h;
        switch (family) {
        case MfFamily::triangular: return {family, {c - h, c, c + h}};
        case MfFamily::trapezoidal: return {family, {c - h, c - 0.25 * h, c + 0.25 * h, c + h}};
        case MfFamily::generalized_bell: return {family, {0.5 * h, 2.0, c}};
        case MfFamily::gaussian: return {family, {sigma, c}};
        case MfFamily::gaussian_combination:
            return {family, {0.75 * sigma, c - 0.25 * h, 0.75 * sigma, c + 0.25 * h}};
        case MfFamily::pi_shaped: return {family, {c - h, c - 0.25 * h, c + 0.25 * h, c + h}};
        case MfFamily::diff_sigmoid: return {family, {slope, c - 0.5 * h, slope, c + 0.5 * h}};
        case MfFamily::prod_sigmoid: return {family, {slope, c - 0.5 * h, -slope, c + 0.5 * h}};
        }
        return {};
    }

    friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;

private:
    MfFamily family_ = MfFamily::gaussian;
    std::vector<double> params_{1.0, 0.0};
};

}  // namespace lcfollow
