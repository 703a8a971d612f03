#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "slt/gammafn.hpp"

namespace slt {

namespace detail {

// SplitMix64 finalizer; full-avalanche mix of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

} // namespace detail

// Counter-based random stream. Output i of a stream is a pure function of
// (master_seed, stream_index, i), so replica-parallel runs are reproducible
// under any scheduling. Streams are value objects; do not share one stream
// between threads.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : seed_(master_seed), index_(stream_index), counter_(0) {
        key_ = detail::mix64(detail::mix64(master_seed ^ 0x8e755d17a0e15f1cULL) ^
                             (stream_index * detail::kGolden + 0x6a09e667f3bcc909ULL));
    }

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream_index() const { return index_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    // Uniform draw strictly inside (0,1).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    double exponential(double rate) {
        return -std::log(uniform01()) / rate;
    }

    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Gamma(shape, scale 1), Marsaglia-Tsang for shape >= 1, boosting below.
    double gamma(double shape) {
        if (shape < 0.0) throw std::invalid_argument("gamma: shape must be >= 0");
        if (shape == 0.0) return 0.0;
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform01(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::uint64_t poisson(double mean);

    // Derived stream for a sub-purpose (marks, noise, ...) of this stream.
    RngStream substream(std::uint64_t k) const {
        RngStream s;
        s.seed_ = seed_;
        s.index_ = index_;
        s.counter_ = 0;
        s.key_ = detail::mix64(key_ ^ ((k + 1) * 0xd1342543de82ef95ULL));
        return s;
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t seed_ = 0;
    std::uint64_t index_ = 0;
    std::uint64_t counter_ = 0;
};

namespace detail {

// Hörmann's PTRS transformed-rejection Poisson sampler, exact for mean >= 10.
inline std::uint64_t poisson_ptrs(double mu, RngStream& s) {
    const double b = 0.931 + 2.53 * std::sqrt(mu);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);
    for (;;) {
        double u = s.uniform01() - 0.5;
        double v = s.uniform01();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mu - mu - lgamma_positive(k + 1.0)) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

} // namespace detail

inline std::uint64_t RngStream::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) throw std::invalid_argument("poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }
    return detail::poisson_ptrs(mean, *this);
}

inline std::vector<RngStream> make_streams(std::uint64_t master_seed, std::size_t n) {
    if (n < 1) throw std::invalid_argument("make_streams: n must be >= 1");
    std::vector<RngStream> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(master_seed, i);
    return out;
}

// Inverse-CDF sample of a jump above the truncation level: the normalized
// tail of the x^{-alpha-2} jump density gives P(J > x) = (x/eps)^{-(1+alpha)}.
inline double sample_truncated_jump(double alpha, double eps, double u) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("sample_truncated_jump: alpha must be in (0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("sample_truncated_jump: eps must be > 0");
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("sample_truncated_jump: u must be in (0,1)");
    return eps * std::pow(u, -1.0 / (1.0 + alpha));
}

// Homogeneous Poisson event times on [0, horizon], sorted ascending.
inline std::vector<double> sample_poisson_events(double rate, double horizon, RngStream& s) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::invalid_argument("sample_poisson_events: bad rate");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("sample_poisson_events: bad horizon");
    std::vector<double> times;
    if (rate == 0.0 || horizon == 0.0) return times;
    double t = s.exponential(rate);
    while (t <= horizon) {
        times.push_back(t);
        t += s.exponential(rate);
    }
    return times;
}

// Noncentral chi-square draw as a Poisson(nc/2) mixture of Gamma(df/2 + K, scale 2).
// Exact for every df >= 0 including df = 0.
inline double sample_ncchisq(double df, double nc, RngStream& s) {
    if (!(df >= 0.0)) throw std::invalid_argument("sample_ncchisq: df must be >= 0");
    if (!(nc >= 0.0)) throw std::invalid_argument("sample_ncchisq: nc must be >= 0");
    const std::uint64_t k = (nc > 0.0) ? s.poisson(0.5 * nc) : 0;
    const double shape = 0.5 * df + static_cast<double>(k);
    if (shape == 0.0) return 0.0;
    return 2.0 * s.gamma(shape);
}

} // namespace slt
