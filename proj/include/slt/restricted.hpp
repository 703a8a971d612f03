#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "slt/parallel.hpp"
#include "slt/rng.hpp"
#include "slt/specfun.hpp"
#include "slt/stablepath.hpp"

namespace slt {

// ---------------------------------------------------------------------------
// Time change onto [0,b]: time spent outside [0,b] is excised, jumps across b
// stop short at b, and re-entry from below 0 happens by the upward jump's
// landing value (clipped into [0,b]).
// ---------------------------------------------------------------------------

struct RestrictedSegment {
    double r0, r1;  // restricted-time interval
    double v0, v1;  // declining values, inside [0,b]
    double t0;      // original time at r0
};

struct RestrictedPath {
    double b = 0.0;
    double dt = 0.0;
    double total_restricted_time = 0.0;
    const PathSkeleton* base = nullptr;
    std::vector<RestrictedSegment> segments;
    std::vector<double> values;    // at restricted grid times 0, dt, 2dt, ...
    std::vector<double> time_map;  // original time at the same grid
};

namespace detail {

// Region state machine over declining linear flows and instantaneous steps of
// a source path. Inside flows and inside discontinuities are forwarded to the
// sinks; everything outside [0,b] is dropped (its duration excised).
template <typename SegSink, typename StepSink>
class RestrictMachine {
public:
    RestrictMachine(double b, SegSink seg, StepSink step)
        : b_(b), seg_(std::move(seg)), step_(std::move(step)) {}

    double restricted_time() const { return r_; }

    void feed_segment(double t0, double t1, double v0, double v1) {
        if (!(t1 > t0)) return;
        if (!started_) start(v0);
        const double slope = (v0 - v1) / (t1 - t0);  // descent rate, >= 0
        if (region_ == Region::Above) {
            if (v1 > b_) return;
            // continuous entry at b; the restricted value there is already b
            const double t_in = (slope > 0.0) ? t0 + (v0 - b_) / slope : t0;
            inside_flow(t_in, t1, b_, v1, slope);
            return;
        }
        if (region_ == Region::Inside) {
            inside_flow(t0, t1, v0, v1, slope);
            return;
        }
        // below 0: keeps falling, nothing to record
    }

    void feed_step(double t, double vb, double va) {
        if (!started_) start(vb);
        if (va == vb) return;
        switch (region_) {
            case Region::Inside:
                if (va > vb) {
                    if (va <= b_) {
                        step_(r_, vlast_, va);
                        vlast_ = va;
                    } else {  // stop short at b, then pause above
                        step_(r_, vlast_, b_);
                        vlast_ = b_;
                        region_ = Region::Above;
                    }
                } else {
                    if (va >= 0.0) {
                        step_(r_, vlast_, va);
                        vlast_ = va;
                    } else {  // instantaneous exit below; trace holds its last value
                        region_ = Region::Below;
                    }
                }
                break;
            case Region::Below:
                if (va < 0.0) break;
                if (va <= b_) {
                    step_(r_, vlast_, va);
                    vlast_ = va;
                    region_ = Region::Inside;
                } else {  // jump from below straight over b: enter-and-cap
                    step_(r_, vlast_, b_);
                    vlast_ = b_;
                    region_ = Region::Above;
                }
                break;
            case Region::Above:
                if (va > b_) break;
                if (va >= 0.0) {
                    if (va != vlast_) step_(r_, vlast_, va);
                    vlast_ = va;
                    region_ = Region::Inside;
                } else {  // instant pass-through of the whole interval
                    region_ = Region::Below;
                }
                break;
        }
    }

private:
    enum class Region { Inside, Above, Below };

    void start(double v0) {
        started_ = true;
        if (v0 > b_) {
            region_ = Region::Above;
            vlast_ = b_;
        } else if (v0 < 0.0) {
            region_ = Region::Below;
            vlast_ = 0.0;
        } else {
            region_ = Region::Inside;
            vlast_ = v0;
        }
    }

    // declining flow that starts inside at value v0 <= b
    void inside_flow(double t0, double t1, double v0, double v1, double slope) {
        region_ = Region::Inside;
        if (v1 >= 0.0) {
            emit(t0, t1 - t0, v0, v1);
            return;
        }
        const double dur = (slope > 0.0) ? v0 / slope : 0.0;
        emit(t0, dur, v0, 0.0);
        region_ = Region::Below;
    }

    void emit(double t0, double dur, double v0, double v1) {
        if (v0 != vlast_) step_(r_, vlast_, v0);
        if (dur > 0.0) {
            seg_(r_, r_ + dur, v0, v1, t0);
            r_ += dur;
        }
        vlast_ = v1;
    }

    double b_;
    SegSink seg_;
    StepSink step_;
    Region region_ = Region::Inside;
    double r_ = 0.0;
    double vlast_ = 0.0;
    bool started_ = false;
};

inline void sample_restricted_grid(RestrictedPath& rp) {
    const std::size_t n =
        static_cast<std::size_t>(std::floor(rp.total_restricted_time / rp.dt + 1e-9)) + 1;
    rp.values.assign(n, 0.0);
    rp.time_map.assign(n, 0.0);
    if (rp.segments.empty()) return;
    std::size_t sp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = static_cast<double>(k) * rp.dt;
        while (sp + 1 < rp.segments.size() && rp.segments[sp].r1 <= r) ++sp;
        if (sp >= rp.segments.size()) break;
        const RestrictedSegment& s = rp.segments[sp];
        const double span = s.r1 - s.r0;
        const double frac = (span > 0.0) ? std::clamp((r - s.r0) / span, 0.0, 1.0) : 0.0;
        rp.values[k] = s.v0 + frac * (s.v1 - s.v0);
        rp.time_map[k] = s.t0 + (r - s.r0);
    }
}

} // namespace detail

inline RestrictedPath restrict_path(const PathSkeleton& path, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("restrict_path: b must be > 0");
    RestrictedPath rp;
    rp.b = b;
    rp.dt = path.dt;
    rp.base = &path;

    auto seg_sink = [&rp](double r0, double r1, double v0, double v1, double t0) {
        rp.segments.push_back({r0, r1, v0, v1, t0});
    };
    auto step_sink = [](double, double, double) {};
    detail::RestrictMachine machine(b, seg_sink, step_sink);
    detail::walk_linear(
        path,
        [&](double t0, double t1, double v0, double v1) {
            machine.feed_segment(t0, t1, v0, v1);
            return false;
        },
        [&](double t, double vb, double va, bool) {
            machine.feed_step(t, vb, va);
            return false;
        });
    rp.total_restricted_time = machine.restricted_time();
    detail::sample_restricted_grid(rp);
    return rp;
}

// Restricting an already-restricted path. With the same boundary this is the
// identity map; with a smaller boundary the machine runs again over the
// stored segments.
inline RestrictedPath restrict_path(const RestrictedPath& rp, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("restrict_path: b must be > 0");
    // already confined to [0,b]: restriction is the identity
    bool confined = true;
    for (const auto& s : rp.segments) {
        if (s.v0 > b || s.v1 > b) {
            confined = false;
            break;
        }
    }
    if (confined) {
        RestrictedPath copy = rp;
        copy.b = b;
        return copy;
    }
    RestrictedPath out;
    out.b = b;
    out.dt = rp.dt;
    out.base = rp.base;

    auto seg_sink = [&out](double r0, double r1, double v0, double v1, double t0) {
        out.segments.push_back({r0, r1, v0, v1, t0});
    };
    auto step_sink = [](double, double, double) {};
    detail::RestrictMachine machine(b, seg_sink, step_sink);
    double last_r = 0.0;
    double last_v = 0.0;
    bool first = true;
    for (const auto& s : rp.segments) {
        if (!first && s.v0 != last_v) machine.feed_step(s.t0, last_v, s.v0);
        (void)last_r;
        machine.feed_segment(s.t0, s.t0 + (s.r1 - s.r0), s.v0, s.v1);
        last_r = s.r1;
        last_v = s.v1;
        first = false;
    }
    out.total_restricted_time = machine.restricted_time();
    detail::sample_restricted_grid(out);
    return out;
}

// ---------------------------------------------------------------------------
// Inverse local time of the restricted process at 0, estimated from one-sided
// band occupation, and its Laplace exponent against the closed form
// ---------------------------------------------------------------------------

namespace detail {

// Occupation of the one-sided band [0, w) along inside flows; finds the exact
// restricted time at which the band-estimated local time acc/w reaches the
// target level.
class ZeroBandClock {
public:
    ZeroBandClock(double w, double target_local_time)
        : w_(w), target_(w * target_local_time) {}

    void feed(double r0, double r1, double v0, double v1) {
        if (found_) return;
        if (v1 >= w_) return;  // declining segment never enters the band
        double r_enter = r0;
        if (v0 > w_) {
            const double slope = (v0 - v1) / (r1 - r0);
            r_enter = r0 + (v0 - w_) / slope;
        }
        const double contribution = r1 - r_enter;
        if (contribution <= 0.0) return;
        acc_ += contribution;
        if (acc_ >= target_) {
            found_ = true;
            sigma_ = r1 - (acc_ - target_);
        }
    }

    bool found() const { return found_; }
    double sigma() const { return sigma_; }
    double local_time(/*at current end*/) const { return acc_ / w_; }

private:
    double w_;
    double target_;
    double acc_ = 0.0;
    bool found_ = false;
    double sigma_ = std::numeric_limits<double>::infinity();
};

} // namespace detail

struct SigmaBReplica {
    double sigma_w = std::numeric_limits<double>::infinity();
    double sigma_w_half = std::numeric_limits<double>::infinity();
    double restricted_time = 0.0;  // total restricted time reached by the walk
    bool censored = false;
};

// One replica of the inverse-local-time draw: stream the compensated jump walk
// (exact compound Poisson plus drift), restrict to [0,b] on the fly, and stop
// as soon as the band clocks at both bandwidths have fired.
inline SigmaBReplica sigma_b_replica(const StableParams& params, double b, double bandwidth,
                                     double eps, double horizon, RngStream stream) {
    const double rate = params.a * levy_tail(params.alpha, eps);
    const double mu = params.a * compensator_drift(params.alpha, eps);

    detail::ZeroBandClock clock_w(bandwidth, 1.0);
    detail::ZeroBandClock clock_h(0.5 * bandwidth, 1.0);
    auto seg_sink = [&](double r0, double r1, double v0, double v1, double) {
        clock_w.feed(r0, r1, v0, v1);
        clock_h.feed(r0, r1, v0, v1);
    };
    auto step_sink = [](double, double, double) {};
    detail::RestrictMachine machine(b, seg_sink, step_sink);

    double t = 0.0;
    double v = 0.0;
    while (t < horizon && !(clock_w.found() && clock_h.found())) {
        const double gap = stream.exponential(rate);
        const double t_next = std::min(t + gap, horizon);
        machine.feed_segment(t, t_next, v, v - mu * (t_next - t));
        v -= mu * (t_next - t);
        if (t + gap > horizon) {
            t = horizon;
            break;
        }
        t = t_next;
        const double dx = sample_truncated_jump(params.alpha, eps, stream.uniform01());
        machine.feed_step(t, v, v + dx);
        v += dx;
    }

    SigmaBReplica rep;
    rep.restricted_time = machine.restricted_time();
    rep.censored = !(clock_w.found() && clock_h.found());
    rep.sigma_w = clock_w.found() ? clock_w.sigma() : rep.restricted_time;
    rep.sigma_w_half = clock_h.found() ? clock_h.sigma() : rep.restricted_time;
    return rep;
}

struct SigmaBResult {
    std::vector<double> q;
    std::vector<double> empirical;    // bandwidth-extrapolated exponent
    std::vector<double> empirical_w;  // raw exponent at the full band width
    std::vector<double> empirical_w_half;
    std::vector<double> theta;        // closed-form exponent
    std::vector<double> rel_diff;
    double sigma_mean = 0.0;          // sanity anchor, E sigma = b
    double censored_frac = 0.0;
    std::size_t censored_count = 0;
    std::size_t replicas = 0;
    double horizon = 0.0;
};

// Monte Carlo Laplace exponent of the restricted inverse local time at level 1
// against the Mittag-Leffler closed form. The one-sided band dips like w^alpha
// near the boundary, so the two raw exponents are Richardson-extrapolated with
// alpha-order weights: (2^alpha Theta(w/2) - Theta(w)) / (2^alpha - 1).
// Censored replicas are counted and excluded from the Laplace means.
inline SigmaBResult sigma_b_experiment(const StableParams& params, double b,
                                       const std::vector<double>& q_list, std::size_t replicas,
                                       double bandwidth, double eps, double horizon,
                                       std::uint64_t seed, unsigned threads = 1) {
    if (replicas < 1) throw std::invalid_argument("sigma_b_experiment: need replicas >= 1");
    for (double q : q_list) {
        if (!(q >= 0.0)) throw std::invalid_argument("sigma_b_experiment: q must be >= 0");
    }

    const auto reps = parallel_map_indexed<SigmaBReplica>(replicas, threads, [&](std::size_t i) {
        return sigma_b_replica(params, b, bandwidth, eps, horizon, RngStream(seed, i));
    });

    SigmaBResult res;
    res.q = q_list;
    res.replicas = replicas;
    res.horizon = horizon;
    for (const auto& rep : reps) {
        if (rep.censored) ++res.censored_count;
    }
    res.censored_frac = static_cast<double>(res.censored_count) / static_cast<double>(replicas);
    const double n_good = static_cast<double>(replicas - res.censored_count);
    if (n_good < 1.0) throw std::runtime_error("sigma_b_experiment: every replica was censored");

    double sigma_sum = 0.0;
    for (const auto& rep : reps) {
        if (!rep.censored) sigma_sum += rep.sigma_w_half;
    }
    res.sigma_mean = sigma_sum / n_good;

    const double pow_a = std::pow(2.0, params.alpha);
    res.empirical.resize(q_list.size());
    res.empirical_w.resize(q_list.size());
    res.empirical_w_half.resize(q_list.size());
    res.theta.resize(q_list.size());
    res.rel_diff.resize(q_list.size());
    for (std::size_t k = 0; k < q_list.size(); ++k) {
        const double q = q_list[k];
        double mean_w = 0.0, mean_h = 0.0;
        for (const auto& rep : reps) {
            if (rep.censored) continue;
            mean_w += std::exp(-q * rep.sigma_w);
            mean_h += std::exp(-q * rep.sigma_w_half);
        }
        mean_w /= n_good;
        mean_h /= n_good;
        res.empirical_w[k] = -std::log(mean_w);
        res.empirical_w_half[k] = -std::log(mean_h);
        res.empirical[k] =
            (pow_a * res.empirical_w_half[k] - res.empirical_w[k]) / (pow_a - 1.0);
        res.theta[k] = theta_b_closed(params.alpha, params.a, b, q);
        res.rel_diff[k] = (res.theta[k] != 0.0)
                              ? std::fabs(res.empirical[k] - res.theta[k]) / res.theta[k]
                              : std::fabs(res.empirical[k]);
    }
    return res;
}

} // namespace slt
