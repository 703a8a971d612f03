#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "slt/marks.hpp"
#include "slt/parallel.hpp"
#include "slt/stablepath.hpp"

namespace slt {

// ---------------------------------------------------------------------------
// Crossing statistics at a fixed level
// ---------------------------------------------------------------------------

// One jump across a fixed level y: undershoot A = y - X_{t-}, overshoot
// B = X_t - y, size H = A + B, ratio U = A / H, and the mark value at y.
struct CrossingRecord {
    double t = 0.0;
    double A = 0.0;
    double B = 0.0;
    double H = 0.0;
    double U = 0.0;
    double markval = std::numeric_limits<double>::quiet_NaN();
    bool has_mark = false;
};

enum class EstimatorKind { Mark, Corridor, JumpSize };

inline std::vector<CrossingRecord> collect_crossings(const PathSkeleton& path, double y,
                                                     const std::vector<MarkPath>* marks = nullptr) {
    if (marks && marks->size() != path.jumps.size())
        throw std::invalid_argument("collect_crossings: marks must align with the jump list");
    std::vector<CrossingRecord> out;
    for (std::size_t i = 0; i < path.jumps.size(); ++i) {
        const JumpEvent& ev = path.jumps[i];
        const double post = ev.x_pre + ev.dx;
        if (!(ev.x_pre < y && y < post)) continue;
        CrossingRecord r;
        r.t = ev.t;
        r.A = y - ev.x_pre;
        r.B = post - y;
        r.H = r.A + r.B;
        r.U = r.A / r.H;
        if (marks) {
            r.markval = eval_mark((*marks)[i], r.A);
            r.has_mark = true;
        }
        out.push_back(r);
    }
    return out;
}

// Crossing records for every level of an ascending grid in one pass.
inline std::vector<std::vector<CrossingRecord>> collect_crossings_multi(
    const PathSkeleton& path, const std::vector<double>& level_grid,
    const std::vector<MarkPath>* marks = nullptr) {
    if (marks && marks->size() != path.jumps.size())
        throw std::invalid_argument("collect_crossings_multi: marks must align with the jump list");
    std::vector<std::vector<CrossingRecord>> out(level_grid.size());
    for (std::size_t i = 0; i < path.jumps.size(); ++i) {
        const JumpEvent& ev = path.jumps[i];
        const double lo = ev.x_pre;
        const double hi = ev.x_pre + ev.dx;
        auto first = std::upper_bound(level_grid.begin(), level_grid.end(), lo);
        for (auto it = first; it != level_grid.end() && *it < hi; ++it) {
            const double y = *it;
            CrossingRecord r;
            r.t = ev.t;
            r.A = y - lo;
            r.B = hi - y;
            r.H = r.A + r.B;
            r.U = r.A / r.H;
            if (marks) {
                r.markval = eval_mark((*marks)[i], r.A);
                r.has_mark = true;
            }
            out[static_cast<std::size_t>(it - level_grid.begin())].push_back(std::move(r));
        }
    }
    return out;
}

// Number of records with time <= t meeting the kind's predicate. Mark counts
// use >= h, corridor uses >= on both undershoot and overshoot, jump-size uses
// a strict > h.
inline std::size_t count_estimator(const std::vector<CrossingRecord>& records, double h,
                                   EstimatorKind kind, double t) {
    if (!(h > 0.0)) throw std::invalid_argument("count_estimator: h must be > 0");
    std::size_t n = 0;
    for (const auto& r : records) {
        if (r.t > t) continue;
        switch (kind) {
            case EstimatorKind::Mark:
                if (!r.has_mark) throw std::logic_error("count_estimator: MARK kind needs mark values");
                if (r.markval >= h) ++n;
                break;
            case EstimatorKind::Corridor:
                if (r.A >= h && r.B >= h) ++n;
                break;
            case EstimatorKind::JumpSize:
                if (r.H > h) ++n;
                break;
        }
    }
    return n;
}

// h^{alpha/q} count / c
inline double rescaled_estimate(std::size_t count, double h, double alpha, double q, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("rescaled_estimate: c must be > 0");
    return std::pow(h, alpha / q) * static_cast<double>(count) / c;
}

// ---------------------------------------------------------------------------
// Sweep of the mark-count estimator against an occupation baseline
// ---------------------------------------------------------------------------

struct SweepResult {
    std::vector<double> h;           // strictly decreasing thresholds
    std::vector<double> sup_error;   // per-h sup over the (level, time) grid
    double constant = 0.0;           // c used in the rescaling
    std::size_t level_count = 0;
    std::size_t time_count = 0;
    double runtime_s = 0.0;
    std::vector<double> runtime_per_h;
};

// For each h, sup over the baseline's (y,t) grid of
// |h^{alpha/q} m_h(y,t)/c - ell(y,t)|. The constant c should include the
// time-scale factor a when the path runs at speed a.
inline SweepResult theorem1_sweep(const PathSkeleton& path, const std::vector<MarkPath>& marks,
                                  double c, double q, const std::vector<double>& h_list,
                                  const LocalTimeField& baseline) {
    if (!(c > 0.0)) throw std::invalid_argument("theorem1_sweep: c must be > 0");
    for (std::size_t k = 1; k < h_list.size(); ++k) {
        if (!(h_list[k] < h_list[k - 1]))
            throw std::invalid_argument("theorem1_sweep: h_list must be strictly decreasing");
    }
    const auto t_start = std::chrono::steady_clock::now();
    const double alpha = path.params.alpha;

    const auto per_level = collect_crossings_multi(path, baseline.level_grid, &marks);

    SweepResult res;
    res.h = h_list;
    res.constant = c;
    res.level_count = baseline.level_grid.size();
    res.time_count = baseline.time_grid.size();
    res.sup_error.assign(h_list.size(), 0.0);
    res.runtime_per_h.assign(h_list.size(), 0.0);

    for (std::size_t hk = 0; hk < h_list.size(); ++hk) {
        const auto h_start = std::chrono::steady_clock::now();
        const double h = h_list[hk];
        double sup = 0.0;
        for (std::size_t i = 0; i < baseline.level_grid.size(); ++i) {
            const auto& records = per_level[i];
            std::size_t rp = 0;
            std::size_t count = 0;
            for (std::size_t j = 0; j < baseline.time_grid.size(); ++j) {
                const double tj = baseline.time_grid[j];
                while (rp < records.size() && records[rp].t <= tj) {
                    if (records[rp].markval >= h) ++count;
                    ++rp;
                }
                const double est = rescaled_estimate(count, h, alpha, q, c);
                sup = std::max(sup, std::fabs(est - baseline.ell[i][j]));
            }
        }
        res.sup_error[hk] = sup;
        res.runtime_per_h[hk] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - h_start).count();
    }
    res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return res;
}

// Empirical rate per unit local time for each threshold: count(h, T) / ell(y, T)
// with T the last point of the field's time grid.
inline std::vector<double> rate_per_local_time(const std::vector<CrossingRecord>& records,
                                               const LocalTimeField& field, double y,
                                               const std::vector<double>& h_list,
                                               EstimatorKind kind) {
    const std::size_t i = field.level_index(y);
    const double lt = field.ell[i].back();
    if (!(lt > 0.0)) throw std::runtime_error("rate_per_local_time: zero local time at the level");
    const double T = field.time_grid.back();
    std::vector<double> rates(h_list.size());
    for (std::size_t k = 0; k < h_list.size(); ++k) {
        rates[k] = static_cast<double>(count_estimator(records, h_list[k], kind, T)) / lt;
    }
    return rates;
}

// ---------------------------------------------------------------------------
// Small statistics helpers
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
};

inline LineFit slope_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("slope_fit: size mismatch");
    const std::size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("slope_fit: need >= 3 points");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (xs[i] == xs[j]) throw std::invalid_argument("slope_fit: duplicated x value");
        }
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    fit.stderr_slope = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
    return fit;
}

struct KsResult {
    double d = 0.0;
    double p = 1.0;
};

namespace detail {

// asymptotic Kolmogorov tail Q(lambda) = 2 sum_j (-1)^{j-1} exp(-2 j^2 lambda^2)
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) *
                                     lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

} // namespace detail

// One-sample KS test of samples in (0,1) against Uniform(0,1); p-value from
// the asymptotic Kolmogorov series.
inline KsResult ks_uniform(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("ks_uniform: need >= 1 sample");
    for (double x : samples) {
        if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("ks_uniform: samples must lie in (0,1)");
    }
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double hi = (static_cast<double>(i) + 1.0) / n - samples[i];
        const double lo = samples[i] - static_cast<double>(i) / n;
        d = std::max(d, std::max(hi, lo));
    }
    KsResult r;
    r.d = d;
    r.p = detail::kolmogorov_q(std::sqrt(n) * d);
    return r;
}

// ---------------------------------------------------------------------------
// Increment-moment scaling of the local time field
// ---------------------------------------------------------------------------

struct IncrementScalingResult {
    std::vector<double> separations;
    std::vector<double> moments;   // MC estimate of E |ell(y) - ell(x)|^p at horizon
    std::vector<double> stderrs;
    double exponent = 0.0;         // slope of log moment vs log separation
    double exponent_stderr = 0.0;
};

inline IncrementScalingResult increment_scaling(
    const StableParams& params, const std::vector<std::pair<double, double>>& pairs, double p,
    double horizon, std::size_t replicas, double eps, double dt, double bandwidth,
    std::uint64_t seed, unsigned threads = 1, SmallJumpMode mode = SmallJumpMode::Gaussian) {
    if (!(p >= 1.0)) throw std::invalid_argument("increment_scaling: p must be >= 1");
    if (pairs.size() < 3) throw std::invalid_argument("increment_scaling: need >= 3 separations");

    std::vector<double> levels;
    for (const auto& pr : pairs) {
        levels.push_back(pr.first);
        levels.push_back(pr.second);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const auto level_index = [&](double y) {
        return static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), y) - levels.begin());
    };

    const std::vector<double> time_grid{horizon};
    const auto per_replica = parallel_map_indexed<std::vector<double>>(
        replicas, threads, [&](std::size_t r) {
            RngStream s(seed, r);
            const PathSkeleton path = simulate_path(params, horizon, eps, dt, mode, s);
            const LocalTimeField field = occupation_local_time(path, levels, bandwidth, time_grid);
            std::vector<double> vals(pairs.size());
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                const double lx = field.ell[level_index(pairs[k].first)][0];
                const double ly = field.ell[level_index(pairs[k].second)][0];
                vals[k] = std::pow(std::fabs(ly - lx), p);
            }
            return vals;
        });

    IncrementScalingResult res;
    res.separations.resize(pairs.size());
    res.moments.assign(pairs.size(), 0.0);
    res.stderrs.assign(pairs.size(), 0.0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        res.separations[k] = std::fabs(pairs[k].second - pairs[k].first);
    }
    for (const auto& vals : per_replica) {
        for (std::size_t k = 0; k < pairs.size(); ++k) res.moments[k] += vals[k];
    }
    const double n = static_cast<double>(replicas);
    for (std::size_t k = 0; k < pairs.size(); ++k) res.moments[k] /= n;
    for (const auto& vals : per_replica) {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double d = vals[k] - res.moments[k];
            res.stderrs[k] += d * d;
        }
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        res.stderrs[k] = std::sqrt(res.stderrs[k] / (n * (n - 1.0)));
    }

    bool fittable = true;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (!(res.separations[k] > 0.0) || !(res.moments[k] > 0.0)) fittable = false;
    }
    if (fittable) {
        std::vector<double> lx(pairs.size()), ly(pairs.size());
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            lx[k] = std::log(res.separations[k]);
            ly[k] = std::log(res.moments[k]);
        }
        const LineFit fit = slope_fit(lx, ly);
        res.exponent = fit.slope;
        res.exponent_stderr = fit.stderr_slope;
    } else {
        res.exponent = std::numeric_limits<double>::quiet_NaN();
        res.exponent_stderr = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

} // namespace slt
