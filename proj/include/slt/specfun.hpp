#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "slt/gammafn.hpp"
#include "slt/quad.hpp"

namespace slt {

struct MLParams {
    double rho;        // series order, 1+alpha for the stable family
    double beta;       // second parameter, > 0
    double tolerance = 1e-13;
};

// Two-parameter Mittag-Leffler function E_{rho,beta}(x) = sum_k x^k / Gamma(beta + k rho),
// by direct series summation. Supported for moderate arguments only; the remainder of
// the positive series is bounded through the (decreasing) term ratio.
inline double mittag_leffler(double rho, double beta, double x,
                             double tolerance = 1e-13, double max_abs_x = 100.0) {
    if (!(rho > 0.0)) throw std::invalid_argument("mittag_leffler: rho must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("mittag_leffler: beta must be > 0");
    if (!(tolerance > 0.0)) throw std::invalid_argument("mittag_leffler: tolerance must be > 0");
    if (!(std::fabs(x) <= max_abs_x)) {
        throw std::out_of_range("mittag_leffler: |x| = " + std::to_string(std::fabs(x)) +
                                " outside supported range " + std::to_string(max_abs_x));
    }
    if (x == 0.0) return 1.0 / gamma_fn(beta);

    const double ax = std::fabs(x);
    const double lax = std::log(ax);
    double sum = 0.0;
    double prev_mag = std::numeric_limits<double>::infinity();
    constexpr std::size_t kMaxTerms = 20000;
    for (std::size_t k = 0; k < kMaxTerms; ++k) {
        const double kk = static_cast<double>(k);
        const double mag = std::exp(kk * lax - lgamma_fn(beta + kk * rho));
        const double term = (x < 0.0 && (k % 2 == 1)) ? -mag : mag;
        sum += term;
        if (k >= 1 && mag < prev_mag) {
            // ratio of consecutive magnitudes keeps shrinking once past the peak
            const double ratio = mag / prev_mag;
            if (mag * ratio / (1.0 - ratio) < tolerance && mag < tolerance) return sum;
        }
        prev_mag = mag;
    }
    throw std::runtime_error("mittag_leffler: series did not converge within term budget");
}

// Scale function W^{(q)}(x) = x^alpha E_{1+alpha,1+alpha}(q x^{1+alpha}) of the
// stable process with Laplace exponent eta^{1+alpha}; W^{(q)}(0) = 0.
inline double scale_W(double alpha, double q, double x) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("scale_W: alpha must be in (0,1)");
    if (!(x >= 0.0)) throw std::invalid_argument("scale_W: x must be >= 0");
    if (x == 0.0) return 0.0;
    const double rho = 1.0 + alpha;
    // the positive series is cancellation-free; cap only at the overflow bound
    return std::pow(x, alpha) *
           mittag_leffler(rho, rho, q * std::pow(x, rho), 1e-13, std::pow(690.0, rho));
}

// Z^{(q)}(x) = 1 + q int_0^x W^{(q)} = E_{1+alpha}(q x^{1+alpha}); Z^{(q)}(0) = 1.
inline double scale_Z(double alpha, double q, double x) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("scale_Z: alpha must be in (0,1)");
    if (!(x >= 0.0)) throw std::invalid_argument("scale_Z: x must be >= 0");
    const double rho = 1.0 + alpha;
    return mittag_leffler(rho, 1.0, q * std::pow(x, rho), 1e-13, std::pow(690.0, rho));
}

// Laplace exponent of the inverse local time of the process restricted to [0,b],
// in Mittag-Leffler closed form. The time-scale factor a enters as q -> q/a.
inline double theta_b_closed(double alpha, double a, double b, double q) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("theta_b_closed: alpha must be in (0,1)");
    if (!(a > 0.0)) throw std::invalid_argument("theta_b_closed: a must be > 0");
    if (!(b > 0.0)) throw std::invalid_argument("theta_b_closed: b must be > 0");
    if (!(q >= 0.0)) throw std::invalid_argument("theta_b_closed: q must be >= 0");
    if (q == 0.0) return 0.0;
    const double rho = 1.0 + alpha;
    const double arg = q * std::pow(b, rho) / a;
    const double range = std::pow(690.0, rho);
    const double e1 = mittag_leffler(rho, 1.0, arg, 1e-13, range);
    const double e2 = mittag_leffler(rho, 1.0 - alpha, arg, 1e-13, range);
    return std::pow(b, -alpha) / e1 * (e2 - 1.0 / gamma_fn(1.0 - alpha));
}

// Same exponent through the fluctuation-theory integral
//   (1/Z^{(q)}(b)) int_0^b PiBarBar(b-z) q W^{(q)}(z) dz,
// with the substitution z = b - v^{1/(1-alpha)} removing the (b-z)^{-alpha}
// endpoint singularity. PiBarBar(x) = x^{-alpha}/Gamma(1-alpha).
inline double theta_b_integral(double alpha, double a, double b, double q,
                               double quad_tol = 1e-12) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("theta_b_integral: alpha must be in (0,1)");
    if (!(a > 0.0)) throw std::invalid_argument("theta_b_integral: a must be > 0");
    if (!(b > 0.0)) throw std::invalid_argument("theta_b_integral: b must be > 0");
    if (!(q >= 0.0)) throw std::invalid_argument("theta_b_integral: q must be >= 0");
    if (q == 0.0) return 0.0;
    const double qa = q / a;
    const double zb = scale_Z(alpha, qa, b);
    const double pre = qa / ((1.0 - alpha) * gamma_fn(1.0 - alpha));
    const double expo = 1.0 / (1.0 - alpha);
    const auto integrand = [&](double v) {
        const double z = b - std::pow(v, expo);  // can round below 0 at the endpoint
        return scale_W(alpha, qa, z > 0.0 ? z : 0.0);
    };
    const double integral = integrate_gk(integrand, 0.0, std::pow(b, 1.0 - alpha), quad_tol);
    return pre * integral / zb;
}

// Laplace exponent of the inverse local time at 0: (1+alpha) xi^{alpha/(1+alpha)}.
inline double laplace_tau0(double alpha, double xi) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("laplace_tau0: alpha must be in (0,1)");
    if (!(xi >= 0.0)) throw std::invalid_argument("laplace_tau0: xi must be >= 0");
    if (xi == 0.0) return 0.0;
    return (1.0 + alpha) * std::pow(xi, alpha / (1.0 + alpha));
}

// Laplace exponent of the mark-threshold count subordinator: c Gamma(1-alpha/q) xi^{alpha/q}.
inline double subordinator_theta(double alpha, double q, double c, double xi) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("subordinator_theta: alpha must be in (0,1)");
    if (!(q > alpha)) throw std::invalid_argument("subordinator_theta: requires q > alpha");
    if (!(xi >= 0.0)) throw std::invalid_argument("subordinator_theta: xi must be >= 0");
    if (xi == 0.0) return 0.0;
    return c * gamma_fn(1.0 - alpha / q) * std::pow(xi, alpha / q);
}

// P(T_y < lambda) for an independent Exp(1) time lambda and the upward point-hitting
// time T_y, y > 0, via quadrature of
//   (1+alpha)/pi int_0^inf sin(pi alpha) s^{1+alpha} / (s^{2(1+alpha)} + 2 s^{1+alpha} cos(pi alpha) + 1) e^{-y s} ds.
inline double lemma7_prob(double alpha, double y, double abs_tol = 1e-9) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("lemma7_prob: alpha must be in (0,1)");
    if (!(y > 0.0)) throw std::invalid_argument("lemma7_prob: y must be > 0");
    const double rho = 1.0 + alpha;
    const double c = std::cos(detail::kPi * alpha);
    const double sn = std::sin(detail::kPi * alpha);
    const auto integrand = [&](double s) {
        const double sr = std::pow(s, rho);
        return sn * sr / (sr * sr + 2.0 * sr * c + 1.0) * std::exp(-y * s);
    };
    // beyond s_max the integrand is below s^{-rho} e^{-y s}; pick s_max so the tail
    // is negligible against abs_tol
    double s_max = std::max(10.0, 50.0 / y);
    while (4.0 * std::pow(s_max, -alpha) / alpha * std::exp(-y * s_max) > 0.1 * abs_tol) s_max *= 2.0;
    const double val = integrate_gk(integrand, 0.0, s_max, abs_tol * detail::kPi / rho);
    return rho / detail::kPi * val;
}

namespace detail {

// Regularized incomplete gamma functions P(a,x), Q(a,x), series + continued fraction.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 10000000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) {
            return sum * std::exp(-x + a * std::log(x) - lgamma_positive(a));
        }
    }
    throw std::runtime_error("gamma_p_series: no convergence");
}

inline double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) {
            return h * std::exp(-x + a * std::log(x) - lgamma_positive(a));
        }
    }
    throw std::runtime_error("gamma_q_contfrac: no convergence");
}

} // namespace detail

// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) throw std::invalid_argument("gamma_p: requires a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_contfrac(a, x);
}

// Regularized upper incomplete gamma Q(a,x) = 1 - P(a,x).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) throw std::invalid_argument("gamma_q: requires a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_contfrac(a, x);
}

struct PoissonMdpResult {
    double lhs;  // exact P(|N_t - t| >= sqrt(t log t) sqrt(2z)) for N_t ~ Poisson(t)
    double rhs;  // t^{-z+delta}
};

// Both sides of the Poisson moderate-deviation bound. The bound is only claimed
// past an unspecified threshold t0; the caller decides where to assert lhs <= rhs.
inline PoissonMdpResult poisson_mdp(double t, double z, double delta) {
    if (!(t > 1.0)) throw std::invalid_argument("poisson_mdp: t must be > 1");
    if (!(z > delta && delta > 0.0)) throw std::invalid_argument("poisson_mdp: requires z > delta > 0");
    const double s = std::sqrt(t * std::log(t)) * std::sqrt(2.0 * z);
    // P(N <= floor(t-s)) + P(N >= ceil(t+s)); Poisson CDF via incomplete gamma:
    // P(N <= k) = Q(k+1, t) and P(N >= k) = P(k, t) for k >= 1.
    double lower = 0.0;
    const double kl = std::floor(t - s);
    if (kl >= 0.0) lower = gamma_q(kl + 1.0, t);
    const double ku = std::ceil(t + s);
    const double upper = gamma_p(ku, t);
    return {lower + upper, std::pow(t, -z + delta)};
}

// Closed-form moment bound for the gridless Hölder quotient of a nonnegative
// diffusion with drift bounded by c started at x (valid for p > 2 and
// 0 < gamma < (p-2)/2p):
//   2^{gamma p + p + 1} (c + 2 sqrt((p-1)(c+p-2)) + 2 sqrt(p-1) sqrt(|x| + 2(c+p-2)))
//     / (1 - 2^{gamma + (2-p)/2p})^p
inline double holder_moment_bound(double c, double x, double p, double gamma) {
    if (!(p > 2.0)) throw std::invalid_argument("holder_moment_bound: p must be > 2");
    if (!(gamma > 0.0 && gamma < (p - 2.0) / (2.0 * p)))
        throw std::invalid_argument("holder_moment_bound: gamma must be in (0,(p-2)/2p)");
    if (!(c > 0.0)) throw std::invalid_argument("holder_moment_bound: c must be > 0");
    const double num = std::pow(2.0, gamma * p + p + 1.0) *
                       (c + 2.0 * std::sqrt((p - 1.0) * (c + p - 2.0)) +
                        2.0 * std::sqrt(p - 1.0) * std::sqrt(std::fabs(x) + 2.0 * (c + p - 2.0)));
    const double den = std::pow(1.0 - std::pow(2.0, gamma + (2.0 - p) / (2.0 * p)), p);
    return num / den;
}

} // namespace slt
