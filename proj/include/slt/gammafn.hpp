#pragma once

#include <cmath>
#include <stdexcept>

namespace slt {

namespace detail {

// Lanczos approximation, g = 7, 9 terms. Good to ~15 significant digits on
// the positive axis; the reflection formula covers x < 0.5.
inline constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrtTwoPi = 2.50662827463100050241576528481104525;

inline double lanczos_sum(double x) {
    double s = kLanczos[0];
    for (int i = 1; i < 9; ++i) s += kLanczos[i] / (x + i);
    return s;
}

// log Gamma(x) for x > 0.
inline double lgamma_positive(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("lgamma_positive: x must be > 0");
    if (x == 1.0 || x == 2.0) return 0.0;
    if (x < 0.5) {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return std::log(kPi / std::sin(kPi * x)) - lgamma_positive(1.0 - x);
    }
    const double z = x - 1.0;
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(lanczos_sum(z));
}

} // namespace detail

// Gamma(x) for non-pole x; overflows past x ~ 171.6 like the true function.
inline double gamma_fn(double x) {
    if (x == std::floor(x) && x <= 0.0) throw std::invalid_argument("gamma_fn: pole at non-positive integer");
    if (x == 1.0 || x == 2.0) return 1.0;
    if (x < 0.5) {
        return detail::kPi / (std::sin(detail::kPi * x) * gamma_fn(1.0 - x));
    }
    const double z = x - 1.0;
    const double t = z + 7.5;
    return detail::kSqrtTwoPi * std::pow(t, z + 0.5) * std::exp(-t) * detail::lanczos_sum(z);
}

// log Gamma(x), x > 0.
inline double lgamma_fn(double x) { return detail::lgamma_positive(x); }

} // namespace slt
