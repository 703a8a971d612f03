#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "slt/gammafn.hpp"
#include "slt/rng.hpp"

namespace slt {

// ---------------------------------------------------------------------------
// Lévy-measure analytics for the spectrally positive stable process with
// Laplace exponent a eta^{1+alpha}. Jump density (a=1):
//   Pi(dx) = (1+alpha) alpha / Gamma(1-alpha) x^{-alpha-2} dx
// ---------------------------------------------------------------------------

// PiBar(x) = Pi((x,inf)) = alpha x^{-alpha-1} / Gamma(1-alpha)
inline double levy_tail(double alpha, double x) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("levy_tail: alpha must be in (0,1)");
    if (!(x > 0.0)) throw std::invalid_argument("levy_tail: x must be > 0");
    return alpha * std::pow(x, -alpha - 1.0) / gamma_fn(1.0 - alpha);
}

// PiBarBar(x) = int_x^inf PiBar(z) dz = x^{-alpha} / Gamma(1-alpha)
inline double levy_double_tail(double alpha, double x) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("levy_double_tail: alpha must be in (0,1)");
    if (!(x > 0.0)) throw std::invalid_argument("levy_double_tail: x must be > 0");
    return std::pow(x, -alpha) / gamma_fn(1.0 - alpha);
}

// mu_eps = int_eps^inf x Pi(dx) = (1+alpha) eps^{-alpha} / Gamma(1-alpha);
// the drift that compensates the retained jumps.
inline double compensator_drift(double alpha, double eps) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("compensator_drift: alpha must be in (0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("compensator_drift: eps must be > 0");
    return (1.0 + alpha) * std::pow(eps, -alpha) / gamma_fn(1.0 - alpha);
}

// sigma^2_eps = int_0^eps x^2 Pi(dx) = (1+alpha) alpha eps^{1-alpha} / ((1-alpha) Gamma(1-alpha));
// variance rate of the optional Gaussian surrogate for the dropped jumps.
inline double small_jump_variance(double alpha, double eps) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("small_jump_variance: alpha must be in (0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("small_jump_variance: eps must be > 0");
    return (1.0 + alpha) * alpha * std::pow(eps, 1.0 - alpha) / ((1.0 - alpha) * gamma_fn(1.0 - alpha));
}

// ---------------------------------------------------------------------------
// Path skeleton
// ---------------------------------------------------------------------------

enum class SmallJumpMode { DriftOnly, Gaussian };

struct StableParams {
    double alpha = 0.5;
    double a = 1.0;  // time-scale factor: the a != 1 process is the a = 1 process at speed a
};

struct JumpEvent {
    double t;      // jump time
    double x_pre;  // value just before the jump
    double dx;     // jump size, > truncation eps
};

// Simulated path: values on the uniform grid 0, dt, ..., T plus the exhaustive
// list of jumps above the truncation level. Between grid points the value is
// treated as piecewise constant for occupation bookkeeping and as linearly
// drifting for crossing detection.
struct PathSkeleton {
    StableParams params;
    double T = 0.0;    // horizon, snapped up to a whole number of grid steps
    double eps = 0.0;  // jump truncation level
    double dt = 0.0;   // grid step
    SmallJumpMode mode = SmallJumpMode::DriftOnly;
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;
    std::vector<double> values;     // size grid_count()
    std::vector<JumpEvent> jumps;   // strictly increasing times

    std::size_t grid_count() const { return values.size(); }
    double grid_time(std::size_t j) const { return static_cast<double>(j) * dt; }
    double drift() const { return params.a * compensator_drift(params.alpha, eps); }
};

inline constexpr double kDefaultJumpCountCap = 1e8;

inline PathSkeleton simulate_path(const StableParams& params, double T, double eps, double dt,
                                  SmallJumpMode mode, RngStream stream,
                                  double jump_count_cap = kDefaultJumpCountCap) {
    if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw std::invalid_argument("simulate_path: alpha must be in (0,1)");
    if (!(params.a > 0.0)) throw std::invalid_argument("simulate_path: a must be > 0");
    if (!(T > 0.0 && eps > 0.0 && dt > 0.0)) throw std::invalid_argument("simulate_path: T, eps, dt must be > 0");

    const double rate = params.a * levy_tail(params.alpha, eps);
    const double expected = rate * T;
    if (expected > jump_count_cap) {
        throw std::runtime_error("simulate_path: expected jump count " + std::to_string(expected) +
                                 " exceeds resource cap " + std::to_string(jump_count_cap) +
                                 "; increase eps or raise the cap");
    }

    PathSkeleton path;
    path.params = params;
    path.eps = eps;
    path.dt = dt;
    path.mode = mode;
    path.master_seed = stream.master_seed();
    path.stream_index = stream.stream_index();

    const std::size_t steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    path.T = static_cast<double>(steps) * dt;

    RngStream jump_stream = stream.substream(0);
    RngStream gauss_stream = stream.substream(1);

    // jump times by exponential spacings, each immediately paired with its size
    double t = jump_stream.exponential(rate);
    while (t <= path.T) {
        JumpEvent ev;
        ev.t = t;
        ev.dx = sample_truncated_jump(params.alpha, eps, jump_stream.uniform01());
        ev.x_pre = 0.0;  // filled below
        path.jumps.push_back(ev);
        t += jump_stream.exponential(rate);
    }

    const double mu = path.drift();
    const double gauss_sd =
        (mode == SmallJumpMode::Gaussian)
            ? std::sqrt(params.a * small_jump_variance(params.alpha, eps) * dt)
            : 0.0;

    path.values.assign(steps + 1, 0.0);
    double jumpsum = 0.0;
    double gsum = 0.0;
    std::size_t jp = 0;
    for (std::size_t j = 1; j <= steps; ++j) {
        const double tj = static_cast<double>(j) * dt;
        while (jp < path.jumps.size() && path.jumps[jp].t <= tj) {
            JumpEvent& ev = path.jumps[jp];
            ev.x_pre = jumpsum - mu * ev.t + gsum;
            jumpsum += ev.dx;
            ++jp;
        }
        if (mode == SmallJumpMode::Gaussian) gsum += gauss_sd * gauss_stream.normal();
        path.values[j] = jumpsum - mu * tj + gsum;
    }
    return path;
}

// ---------------------------------------------------------------------------
// Occupation-density local time on a (level x time) grid
// ---------------------------------------------------------------------------

struct LocalTimeField {
    std::vector<double> level_grid;    // ascending levels y_i
    std::vector<double> time_grid;     // ascending times t_j
    double bandwidth = 0.0;            // w; level bins are [y - w/2, y + w/2)
    std::vector<std::vector<double>> ell;  // ell[i][j] = estimate at (level i, time j)

    double at(std::size_t level_idx, std::size_t time_idx) const { return ell[level_idx][time_idx]; }

    std::size_t level_index(double y) const {
        const double tol = 1e-12 * std::max(1.0, std::fabs(y));
        for (std::size_t i = 0; i < level_grid.size(); ++i) {
            if (std::fabs(level_grid[i] - y) <= tol) return i;
        }
        throw std::invalid_argument("LocalTimeField: level " + std::to_string(y) + " is not on the grid");
    }
};

namespace detail {

// Visit the skeleton's piecewise-constant segments in time order.
// callback(value, t0, t1) with t1 > t0.
template <typename F>
void for_constant_segments(const PathSkeleton& path, const F& callback) {
    const std::size_t steps = path.grid_count() - 1;
    std::size_t jp = 0;
    for (std::size_t j = 0; j < steps; ++j) {
        const double t0 = path.grid_time(j);
        const double t1 = path.grid_time(j + 1);
        double v = path.values[j];
        double cur = t0;
        while (jp < path.jumps.size() && path.jumps[jp].t <= t1) {
            const JumpEvent& ev = path.jumps[jp];
            if (ev.t > cur) callback(v, cur, ev.t);
            v += ev.dx;
            cur = ev.t;
            ++jp;
        }
        if (t1 > cur) callback(v, cur, t1);
    }
}

} // namespace detail

inline LocalTimeField occupation_local_time(const PathSkeleton& path,
                                            std::vector<double> level_grid, double bandwidth,
                                            std::vector<double> time_grid) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("occupation_local_time: bandwidth must be > 0");
    if (level_grid.empty() || time_grid.empty())
        throw std::invalid_argument("occupation_local_time: grids must be non-empty");
    if (!std::is_sorted(level_grid.begin(), level_grid.end()) ||
        !std::is_sorted(time_grid.begin(), time_grid.end()))
        throw std::invalid_argument("occupation_local_time: grids must be ascending");

    LocalTimeField field;
    field.bandwidth = bandwidth;
    field.level_grid = std::move(level_grid);
    field.time_grid = std::move(time_grid);
    field.ell.assign(field.level_grid.size(),
                     std::vector<double>(field.time_grid.size(), 0.0));

    std::vector<double> occ(field.level_grid.size(), 0.0);
    std::size_t tg = 0;
    const double w = bandwidth;

    const auto add_bins = [&](double v, double dtime) {
        // bins containing v: y in (v - w/2, v + w/2]
        const auto lo = std::upper_bound(field.level_grid.begin(), field.level_grid.end(), v - 0.5 * w);
        const auto hi = std::upper_bound(field.level_grid.begin(), field.level_grid.end(), v + 0.5 * w);
        for (auto it = lo; it != hi; ++it) {
            const std::size_t i = static_cast<std::size_t>(it - field.level_grid.begin());
            if (field.level_grid[i] - 0.5 * w <= v && v < field.level_grid[i] + 0.5 * w) occ[i] += dtime;
        }
    };

    double cur = 0.0;
    detail::for_constant_segments(path, [&](double v, double t0, double t1) {
        cur = t0;
        while (tg < field.time_grid.size() && field.time_grid[tg] <= t1) {
            const double tcut = field.time_grid[tg];
            if (tcut > cur) {
                add_bins(v, tcut - cur);
                cur = tcut;
            }
            for (std::size_t i = 0; i < occ.size(); ++i) field.ell[i][tg] = occ[i] / w;
            ++tg;
        }
        if (t1 > cur) add_bins(v, t1 - cur);
    });
    // time-grid points beyond the path horizon keep the final occupation
    for (; tg < field.time_grid.size(); ++tg) {
        for (std::size_t i = 0; i < occ.size(); ++i) field.ell[i][tg] = occ[i] / w;
    }
    return field;
}

// First time-grid point with ell > s; +inf sentinel when local time never exceeds s.
inline double inverse_local_time(const LocalTimeField& field, double y, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("inverse_local_time: s must be >= 0");
    const std::size_t i = field.level_index(y);
    for (std::size_t j = 0; j < field.time_grid.size(); ++j) {
        if (field.ell[i][j] > s) return field.time_grid[j];
    }
    return std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Crossing detection on the drift-interpolated path
// ---------------------------------------------------------------------------

namespace detail {

// Visit the drift-interpolated path: linear segments with slope -drift between
// events, plus instantaneous steps (jumps and grid-time Gaussian increments).
// segment(t0, t1, v0, v1): linear piece; step(t, v_before, v_after, is_jump).
// Either callback may return true to stop the walk.
template <typename SegF, typename StepF>
void walk_linear(const PathSkeleton& path, const SegF& segment, const StepF& step) {
    const std::size_t steps = path.grid_count() - 1;
    const double mu = path.drift();
    std::size_t jp = 0;
    for (std::size_t j = 0; j < steps; ++j) {
        const double t0 = path.grid_time(j);
        const double t1 = path.grid_time(j + 1);
        double v = path.values[j];
        double cur = t0;
        while (jp < path.jumps.size() && path.jumps[jp].t <= t1) {
            const JumpEvent& ev = path.jumps[jp];
            const double v_end = v - mu * (ev.t - cur);
            if (ev.t > cur && segment(cur, ev.t, v, v_end)) return;
            if (step(ev.t, v_end, v_end + ev.dx, true)) return;
            v = v_end + ev.dx;
            cur = ev.t;
            ++jp;
        }
        const double v_end = v - mu * (t1 - cur);
        if (t1 > cur && segment(cur, t1, v, v_end)) return;
        // snap to the stored grid value; a genuine step in Gaussian mode,
        // round-off otherwise
        if (step(t1, v_end, path.values[j + 1], false)) return;
    }
}

} // namespace detail

// First time the skeleton reaches or crosses level y. Downward passages are
// located by linear interpolation of the drift segment; upward passages can
// happen by jump. Returns +inf when the level is never reached.
inline double first_passage(const PathSkeleton& path, double y) {
    if (path.values.empty()) throw std::invalid_argument("first_passage: empty skeleton");
    if (path.values[0] == y) return 0.0;
    const double mu = path.drift();
    double result = std::numeric_limits<double>::infinity();
    detail::walk_linear(
        path,
        [&](double t0, double /*t1*/, double v0, double v1) {
            if (v1 <= y && y <= v0) {  // downward passage through y
                result = (mu > 0.0) ? t0 + (v0 - y) / mu : t0;
                return true;
            }
            return false;
        },
        [&](double t, double vb, double va, bool /*is_jump*/) {
            if ((vb < y && y <= va) || (va <= y && y < vb)) {
                result = t;
                return true;
            }
            return false;
        });
    return result;
}

// First time the skeleton's interpolated value equals y. Continuous (drift)
// crossings count; a jump counts only when it lands exactly on y. Gaussian
// grid steps stand in for aggregated small-jump motion and count in both
// directions.
inline double hitting_time(const PathSkeleton& path, double y) {
    if (path.values.empty()) throw std::invalid_argument("hitting_time: empty skeleton");
    if (path.values[0] == y) return 0.0;
    const double mu = path.drift();
    const bool gaussian = path.mode == SmallJumpMode::Gaussian;
    double result = std::numeric_limits<double>::infinity();
    detail::walk_linear(
        path,
        [&](double t0, double /*t1*/, double v0, double v1) {
            if (v1 <= y && y <= v0) {
                result = (mu > 0.0) ? t0 + (v0 - y) / mu : t0;
                return true;
            }
            return false;
        },
        [&](double t, double vb, double va, bool is_jump) {
            if (is_jump) {
                if (va == y) {
                    result = t;
                    return true;
                }
                return false;
            }
            if (gaussian && ((vb < y && y <= va) || (va <= y && y < vb))) {
                result = t;
                return true;
            }
            return false;
        });
    return result;
}

} // namespace slt
