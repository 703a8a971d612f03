#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "slt/gammafn.hpp"
#include "slt/rng.hpp"
#include "slt/stablepath.hpp"

namespace slt {

// ---------------------------------------------------------------------------
// Marking kernels: self-similar laws on nonnegative paths over a jump interval.
// A unit path Z on [0,1] scales to (x^q Z(s/x), 0 <= s <= x) for jump size x.
// ---------------------------------------------------------------------------

enum class KernelKind { Hat, BesqExcursion, Custom };

struct MarkKernel {
    KernelKind kind = KernelKind::Hat;
    double q = 1.0;           // self-similarity exponent
    int resolution = 64;      // samples per unit path, >= 2
    double alpha = 0.5;       // excursion parameter for BesqExcursion
    std::function<std::vector<double>(RngStream&)> custom_sampler;

    static MarkKernel hat(int resolution = 64) {
        MarkKernel k;
        k.kind = KernelKind::Hat;
        k.q = 1.0;
        k.resolution = resolution;
        return k;
    }

    // Unit path: normalized BESQ(-2 alpha) excursion realized as a BESQ(4+2 alpha)
    // bridge from 0 to 0; q = 1.
    static MarkKernel besq_excursion(double alpha, int resolution = 64) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("besq_excursion: alpha must be in (0,1)");
        MarkKernel k;
        k.kind = KernelKind::BesqExcursion;
        k.q = 1.0;
        k.resolution = resolution;
        k.alpha = alpha;
        return k;
    }

    // Custom kernels must declare their q explicitly.
    static MarkKernel custom(double q, int resolution,
                             std::function<std::vector<double>(RngStream&)> sampler) {
        if (!(q > 0.0)) throw std::invalid_argument("MarkKernel::custom: q must be > 0");
        MarkKernel k;
        k.kind = KernelKind::Custom;
        k.q = q;
        k.resolution = resolution;
        k.custom_sampler = std::move(sampler);
        return k;
    }
};

// One sampled mark attached to a jump of size x. Values live on the uniform
// unit grid; evaluation rescales by x^q. Hat marks evaluate in closed form.
struct MarkPath {
    double x = 1.0;
    double q = 1.0;
    bool exact_hat = false;
    std::vector<double> unit_samples;
};

// ---------------------------------------------------------------------------
// BESQ simulation by exact noncentral chi-square transitions
// ---------------------------------------------------------------------------

// BESQ(delta) path from x0 sampled at the given ascending times; the transition
// over a step s is s * ncchisq(df = delta, nc = x/s). Conditional mean x + delta s,
// conditional variance 4 x s + 2 delta s^2.
inline std::vector<double> besq_from_zero(double delta, double x0,
                                          const std::vector<double>& time_grid, RngStream& s) {
    if (!(delta >= 0.0)) throw std::invalid_argument("besq_from_zero: delta must be >= 0");
    if (!(x0 >= 0.0)) throw std::invalid_argument("besq_from_zero: x0 must be >= 0");
    if (time_grid.empty()) throw std::invalid_argument("besq_from_zero: empty time grid");
    if (!std::is_sorted(time_grid.begin(), time_grid.end()))
        throw std::invalid_argument("besq_from_zero: time grid must be ascending");

    std::vector<double> out(time_grid.size());
    double v = x0;
    double t = 0.0;
    for (std::size_t i = 0; i < time_grid.size(); ++i) {
        const double step = time_grid[i] - t;
        if (step > 0.0) v = step * sample_ncchisq(delta, v / step, s);
        out[i] = v;
        t = time_grid[i];
    }
    return out;
}

// Unit BESQ(4+2 alpha) bridge from 0 to 0 by time inversion Z_u = u^2 X_{1/u - 1},
// pinned to 0 at both endpoints. Equivalently a normalized BESQ(-2 alpha) excursion.
inline MarkPath besq_bridge(double alpha, int resolution, RngStream& s) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("besq_bridge: alpha must be in (0,1)");
    if (resolution < 2) throw std::invalid_argument("besq_bridge: resolution must be >= 2");

    MarkPath mark;
    mark.x = 1.0;
    mark.q = 1.0;
    mark.unit_samples.assign(static_cast<std::size_t>(resolution), 0.0);

    const double delta = 4.0 + 2.0 * alpha;
    const int last = resolution - 1;
    // interior grid u_k = k/(resolution-1) maps to forward time tau = 1/u - 1,
    // ascending as k decreases from last-1 down to 1
    double v = 0.0;   // X at tau = 0 (u = 1), started from 0
    double tau = 0.0;
    for (int k = last - 1; k >= 1; --k) {
        const double u = static_cast<double>(k) / static_cast<double>(last);
        const double tau_next = 1.0 / u - 1.0;
        const double step = tau_next - tau;
        v = step * sample_ncchisq(delta, v / step, s);
        tau = tau_next;
        mark.unit_samples[static_cast<std::size_t>(k)] = u * u * v;
    }
    return mark;
}

// ---------------------------------------------------------------------------
// Unit-path sampling, scaling, evaluation
// ---------------------------------------------------------------------------

inline MarkPath sample_unit_path(const MarkKernel& kernel, RngStream& s) {
    if (kernel.resolution < 2) throw std::invalid_argument("sample_unit_path: resolution must be >= 2");
    MarkPath mark;
    mark.x = 1.0;
    mark.q = kernel.q;
    switch (kernel.kind) {
        case KernelKind::Hat: {
            mark.exact_hat = true;
            const int last = kernel.resolution - 1;
            mark.unit_samples.resize(static_cast<std::size_t>(kernel.resolution));
            for (int i = 0; i <= last; ++i) {
                const double u = static_cast<double>(i) / static_cast<double>(last);
                mark.unit_samples[static_cast<std::size_t>(i)] = std::min(u, 1.0 - u);
            }
            return mark;
        }
        case KernelKind::BesqExcursion: {
            MarkPath b = besq_bridge(kernel.alpha, kernel.resolution, s);
            b.q = kernel.q;
            return b;
        }
        case KernelKind::Custom: {
            if (!kernel.custom_sampler) throw std::logic_error("sample_unit_path: custom kernel without sampler");
            mark.unit_samples = kernel.custom_sampler(s);
            if (mark.unit_samples.size() < 2) throw std::logic_error("sample_unit_path: custom sampler returned < 2 samples");
            mark.unit_samples.front() = 0.0;
            mark.unit_samples.back() = 0.0;
            return mark;
        }
    }
    throw std::logic_error("sample_unit_path: unreachable");
}

// Multiply the mark's domain by the given factor; values scale as factor^q.
inline MarkPath scale_mark(const MarkPath& mark, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("scale_mark: x must be > 0");
    MarkPath out = mark;
    out.x = mark.x * x;
    return out;
}

// Value at position s: linear interpolation on the scaled grid inside (0,x),
// exactly 0 outside. Hat marks use the closed form x^q min(s/x, 1-s/x).
inline double eval_mark(const MarkPath& mark, double s) {
    if (!(s > 0.0) || !(s < mark.x)) return 0.0;
    const double u = s / mark.x;
    const double scale = std::pow(mark.x, mark.q);
    if (mark.exact_hat) return scale * std::min(u, 1.0 - u);
    const std::size_t n = mark.unit_samples.size();
    const double pos = u * static_cast<double>(n - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(pos), n - 2);
    const double frac = pos - static_cast<double>(i);
    return scale * ((1.0 - frac) * mark.unit_samples[i] + frac * mark.unit_samples[i + 1]);
}

// ---------------------------------------------------------------------------
// Hölder quotient restricted to a sample grid
// ---------------------------------------------------------------------------

// max over grid pairs of |f(t_j) - f(t_i)| / (t_j - t_i)^gamma. Pairs are
// scanned by lag with an exact range-based cutoff: once no remaining lag can
// beat the current maximum the scan stops, so the result matches the full
// O(n^2) evaluation.
inline double holder_quotient(const std::vector<double>& samples, const std::vector<double>& grid,
                              double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("holder_quotient: gamma must be > 0");
    if (samples.size() != grid.size()) throw std::invalid_argument("holder_quotient: size mismatch");
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("holder_quotient: need >= 2 samples");

    double min_step = std::numeric_limits<double>::infinity();
    double fmin = samples[0], fmax = samples[0];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = grid[i + 1] - grid[i];
        if (!(d > 0.0)) throw std::invalid_argument("holder_quotient: grid must be strictly ascending");
        min_step = std::min(min_step, d);
        fmin = std::min(fmin, samples[i + 1]);
        fmax = std::max(fmax, samples[i + 1]);
    }
    const double range = fmax - fmin;

    double best = 0.0;
    for (std::size_t lag = 1; lag < n; ++lag) {
        // any pair at lag >= this one has time separation >= lag * min_step
        const double bound =
            range / std::pow(static_cast<double>(lag) * min_step * (1.0 - 1e-12), gamma);
        if (bound < best) break;
        for (std::size_t i = 0; i + lag < n; ++i) {
            const double q = std::fabs(samples[i + lag] - samples[i]) /
                             std::pow(grid[i + lag] - grid[i], gamma);
            if (q > best) best = q;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// The constant c = (1+alpha) Gamma(1-alpha)^{-1} E((Z(U))^{alpha/q})
// ---------------------------------------------------------------------------

inline double mark_constant_c(const MarkKernel& kernel, double alpha, RngStream* stream = nullptr,
                              std::size_t mc_samples = 1000000) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("mark_constant_c: alpha must be in (0,1)");
    if (!(kernel.q > alpha))
        throw std::invalid_argument("mark_constant_c: requires q > alpha");
    switch (kernel.kind) {
        case KernelKind::Hat:
            return std::pow(2.0, -alpha) / gamma_fn(1.0 - alpha);
        case KernelKind::BesqExcursion:
            return std::pow(2.0, alpha) * gamma_fn(1.0 + alpha) / gamma_fn(1.0 - alpha);
        case KernelKind::Custom: {
            if (stream == nullptr)
                throw std::logic_error("mark_constant_c: custom kernel needs a stream for the Monte Carlo estimate");
            const double expo = alpha / kernel.q;
            double acc = 0.0;
            for (std::size_t i = 0; i < mc_samples; ++i) {
                MarkPath z = sample_unit_path(kernel, *stream);
                const double u = stream->uniform01();
                acc += std::pow(eval_mark(z, u), expo);
            }
            return (1.0 + alpha) / gamma_fn(1.0 - alpha) * acc / static_cast<double>(mc_samples);
        }
    }
    throw std::logic_error("mark_constant_c: unreachable");
}

// ---------------------------------------------------------------------------
// Piling: greedy partition of jumps, in decreasing size order, into sequences
// with pairwise-disjoint jump intervals
// ---------------------------------------------------------------------------

struct PileSet {
    std::vector<std::vector<std::size_t>> piles;  // original jump indices
    const std::vector<JumpEvent>* source = nullptr;
};

namespace detail {

// Sorted interval set keyed by start; touching endpoints count as intersecting.
class IntervalSet {
public:
    bool intersects(double lo, double hi) const {
        auto it = ivals_.lower_bound(lo);
        if (it != ivals_.end() && it->first <= hi) return true;
        if (it != ivals_.begin()) {
            --it;
            if (it->second >= lo) return true;
        }
        return false;
    }
    void insert(double lo, double hi) { ivals_.emplace(lo, hi); }

private:
    std::map<double, double> ivals_;
};

} // namespace detail

inline PileSet pile_jumps(const std::vector<JumpEvent>& jumps) {
    std::vector<std::size_t> order(jumps.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (jumps[a].dx != jumps[b].dx) return jumps[a].dx > jumps[b].dx;
        return jumps[a].t < jumps[b].t;  // ties: earlier jump first
    });

    PileSet ps;
    ps.source = &jumps;
    std::vector<detail::IntervalSet> sets;
    for (std::size_t idx : order) {
        const double lo = jumps[idx].x_pre;
        const double hi = jumps[idx].x_pre + jumps[idx].dx;
        std::size_t k = 0;
        for (; k < sets.size(); ++k) {
            if (!sets[k].intersects(lo, hi)) break;
        }
        if (k == sets.size()) {
            sets.emplace_back();
            ps.piles.emplace_back();
        }
        sets[k].insert(lo, hi);
        ps.piles[k].push_back(idx);
    }
    return ps;
}

// Exhaustive check of the pile invariants: every index in exactly one pile,
// pairwise-disjoint intervals inside each pile, first element largest.
// Disjointness is checked on the sorted intervals: any overlapping pair
// implies an overlapping adjacent pair in start order.
inline bool pile_set_valid(const PileSet& ps) {
    if (ps.source == nullptr) return false;
    const auto& jumps = *ps.source;
    std::vector<char> seen(jumps.size(), 0);
    for (const auto& pile : ps.piles) {
        if (pile.empty()) return false;
        std::vector<std::pair<double, double>> ivals;
        ivals.reserve(pile.size());
        for (std::size_t j : pile) {
            if (j >= jumps.size() || seen[j]) return false;
            seen[j] = 1;
            if (jumps[j].dx > jumps[pile.front()].dx) return false;
            ivals.emplace_back(jumps[j].x_pre, jumps[j].x_pre + jumps[j].dx);
        }
        std::sort(ivals.begin(), ivals.end());
        for (std::size_t k = 1; k < ivals.size(); ++k) {
            if (ivals[k].first <= ivals[k - 1].second) return false;
        }
    }
    for (char c : seen) {
        if (!c) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// The aggregate field: sum of mark values at level y over the jumps whose
// interval spans y
// ---------------------------------------------------------------------------

inline std::vector<double> cmj_aggregate(const std::vector<JumpEvent>& jumps,
                                         const std::vector<MarkPath>& marks,
                                         const std::vector<double>& level_grid, double T) {
    if (jumps.size() != marks.size())
        throw std::invalid_argument("cmj_aggregate: every jump needs a mark");
    std::vector<double> field(level_grid.size(), 0.0);
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        const JumpEvent& ev = jumps[i];
        if (ev.t > T) continue;
        const double lo = ev.x_pre;
        const double hi = ev.x_pre + ev.dx;
        auto first = std::upper_bound(level_grid.begin(), level_grid.end(), lo);
        for (auto it = first; it != level_grid.end() && *it < hi; ++it) {
            const std::size_t k = static_cast<std::size_t>(it - level_grid.begin());
            field[k] += eval_mark(marks[i], *it - lo);
        }
    }
    return field;
}

} // namespace slt
