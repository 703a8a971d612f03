#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "slt/config.hpp"
#include "slt/estimators.hpp"
#include "slt/marks.hpp"
#include "slt/parallel.hpp"
#include "slt/restricted.hpp"
#include "slt/rng.hpp"
#include "slt/skeleton_io.hpp"
#include "slt/specfun.hpp"
#include "slt/stablepath.hpp"

namespace slt {

namespace detail {

inline unsigned effective_threads(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv("SLT_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return cfg.threads;
}

class CsvWriter {
public:
    explicit CsvWriter(std::string header) : header_(std::move(header)) {}

    class Row {
    public:
        explicit Row(CsvWriter& w) : w_(w) {}
        Row& num(double v) {
            sep();
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            line_ += buf;
            return *this;
        }
        Row& integer(long long v) {
            sep();
            line_ += std::to_string(v);
            return *this;
        }
        Row& text(const std::string& s) {
            sep();
            line_ += s;
            return *this;
        }
        Row& empty() {
            sep();
            return *this;
        }
        ~Row() { w_.lines_.push_back(line_); }

    private:
        void sep() {
            if (!line_.empty() || started_) line_ += ",";
            started_ = true;
        }
        CsvWriter& w_;
        std::string line_;
        bool started_ = false;
    };

    Row row() { return Row(*this); }

    void save(const std::string& filename) const {
        std::ofstream out(filename, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + filename);
        out << header_ << "\n";
        for (const auto& l : lines_) out << l << "\n";
        if (!out) throw std::runtime_error("write failed for " + filename);
    }

private:
    std::string header_;
    std::vector<std::string> lines_;
    friend class Row;
};

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["alpha"] = cfg.alpha;
    j["a"] = cfg.a;
    j["T"] = cfg.T;
    j["eps"] = cfg.eps;
    j["dt"] = cfg.dt;
    j["bandwidth"] = cfg.bandwidth;
    j["level_min"] = cfg.level_min;
    j["level_max"] = cfg.level_max;
    j["level_step"] = cfg.level_step;
    j["time_step"] = cfg.time_step;
    j["h0"] = cfg.h0;
    j["h_factor"] = cfg.h_factor;
    j["h_count"] = cfg.h_count;
    j["kernel"] = cfg.kernel;
    j["mark_resolution"] = cfg.mark_resolution;
    j["b"] = cfg.b;
    j["q_list"] = cfg.q_list;
    j["seed"] = cfg.seed;
    j["replicas"] = cfg.replicas;
    j["threads"] = cfg.threads;
    j["level"] = cfg.level;
    j["small_jump_mode"] = cfg.small_jump_mode;
    j["p"] = cfg.p;
    j["sep_min"] = cfg.sep_min;
    j["sep_factor"] = cfg.sep_factor;
    j["sep_count"] = cfg.sep_count;
    j["mc_samples"] = cfg.mc_samples;
    j["resource_cap"] = cfg.resource_cap;
    j["dump_skeleton"] = cfg.dump_skeleton;
    return j;
}

inline void save_summary(const std::string& filename, const ExperimentConfig& cfg,
                         const nlohmann::json& metrics, double wall_s) {
    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["seed"] = cfg.seed;
    j["metrics"] = metrics;
    j["wall_time_s"] = wall_s;
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + filename);
    out << j.dump(2) << "\n";
}

inline std::vector<double> make_level_grid(const ExperimentConfig& cfg) {
    std::vector<double> levels;
    for (int i = 0;; ++i) {
        const double v = cfg.level_min + static_cast<double>(i) * cfg.level_step;
        if (v > cfg.level_max + 1e-9 * cfg.level_step) break;
        levels.push_back(v);
    }
    return levels;
}

inline std::vector<double> make_time_grid(double T, double step) {
    std::vector<double> times;
    for (int i = 0;; ++i) {
        const double v = static_cast<double>(i) * step;
        if (v > T + 1e-9 * step) break;
        times.push_back(v);
    }
    return times;
}

inline std::vector<double> make_h_list(const ExperimentConfig& cfg) {
    std::vector<double> hs(static_cast<std::size_t>(cfg.h_count));
    double h = cfg.h0;
    for (auto& v : hs) {
        v = h;
        h *= cfg.h_factor;
    }
    return hs;
}

inline SmallJumpMode mode_of(const ExperimentConfig& cfg) {
    return cfg.small_jump_mode == "gaussian" ? SmallJumpMode::Gaussian : SmallJumpMode::DriftOnly;
}

inline MarkKernel kernel_of(const ExperimentConfig& cfg) {
    if (cfg.kernel == "hat") return MarkKernel::hat(cfg.mark_resolution);
    if (cfg.kernel == "besq") return MarkKernel::besq_excursion(cfg.alpha, cfg.mark_resolution);
    throw std::invalid_argument("this experiment needs kernel=hat or kernel=besq");
}

// One scaled mark per jump, sampled from the replica's mark substream.
inline std::vector<MarkPath> sample_marks(const PathSkeleton& path, const MarkKernel& kernel,
                                          RngStream mark_stream) {
    std::vector<MarkPath> marks;
    marks.reserve(path.jumps.size());
    for (const auto& j : path.jumps) {
        marks.push_back(scale_mark(sample_unit_path(kernel, mark_stream), j.dx));
    }
    return marks;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Experiment runners. Each writes <out>/<name>.csv and <out>/<name>_summary.json
// and returns a process exit code: 0 ok, 2 threshold failure.
// ---------------------------------------------------------------------------

inline int run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const StableParams params{cfg.alpha, cfg.a};
    const PathSkeleton path = simulate_path(params, cfg.T, cfg.eps, cfg.dt, detail::mode_of(cfg),
                                            RngStream(cfg.seed, 0), cfg.resource_cap);
    detail::CsvWriter csv("t,x");
    for (std::size_t j = 0; j < path.grid_count(); ++j) {
        csv.row().num(path.grid_time(j)).num(path.values[j]);
    }
    csv.save(out_dir + "/simulate.csv");
    if (cfg.dump_skeleton) dump_skeleton(path, out_dir + "/skeleton.bin");

    nlohmann::json m;
    m["jump_count"] = path.jumps.size();
    m["expected_jump_count"] = cfg.a * levy_tail(cfg.alpha, cfg.eps) * path.T;
    m["final_value"] = path.values.back();
    detail::save_summary(out_dir + "/simulate_summary.json", cfg, m,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return 0;
}

inline int run_theorem1(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const StableParams params{cfg.alpha, cfg.a};
    const MarkKernel kernel = detail::kernel_of(cfg);
    RngStream stream(cfg.seed, 0);
    const PathSkeleton path = simulate_path(params, cfg.T, cfg.eps, cfg.dt, detail::mode_of(cfg),
                                            stream, cfg.resource_cap);
    const auto marks = detail::sample_marks(path, kernel, stream.substream(2));

    const auto levels = detail::make_level_grid(cfg);
    const auto times = detail::make_time_grid(path.T, cfg.time_step);
    const LocalTimeField base = occupation_local_time(path, levels, cfg.bandwidth, times);
    const LocalTimeField base2 = occupation_local_time(path, levels, 2.0 * cfg.bandwidth, times);

    double bw_err = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        for (std::size_t j = 0; j < times.size(); ++j) {
            bw_err = std::max(bw_err, std::fabs(base.ell[i][j] - base2.ell[i][j]));
        }
    }

    const double c_eff = cfg.a * mark_constant_c(kernel, cfg.alpha);
    const auto h_list = detail::make_h_list(cfg);
    const SweepResult sweep = theorem1_sweep(path, marks, c_eff, kernel.q, h_list, base);

    detail::CsvWriter csv("h,sup_error,levels,times,runtime_s");
    for (std::size_t k = 0; k < sweep.h.size(); ++k) {
        csv.row()
            .num(sweep.h[k])
            .num(sweep.sup_error[k])
            .integer(static_cast<long long>(sweep.level_count))
            .integer(static_cast<long long>(sweep.time_count))
            .num(sweep.runtime_per_h[k]);
    }
    csv.save(out_dir + "/theorem1.csv");

    nlohmann::json m;
    m["constant"] = c_eff;
    m["bandwidth_error"] = bw_err;
    m["sup_error_first"] = sweep.sup_error.front();
    m["sup_error_last"] = sweep.sup_error.back();
    m["jump_count"] = path.jumps.size();
    detail::save_summary(out_dir + "/theorem1_summary.json", cfg, m,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return 0;
}

inline int run_crossings(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const StableParams params{cfg.alpha, cfg.a};
    const bool marked = cfg.kernel != "none";
    const MarkKernel kernel = marked ? detail::kernel_of(cfg) : MarkKernel::hat(2);

    std::vector<std::vector<CrossingRecord>> per_replica;
    if (cfg.T > 0.0) {
        per_replica = parallel_map_indexed<std::vector<CrossingRecord>>(
            cfg.replicas, detail::effective_threads(cfg), [&](std::size_t r) {
                RngStream s(cfg.seed, r);
                const PathSkeleton path = simulate_path(params, cfg.T, cfg.eps, cfg.dt,
                                                        detail::mode_of(cfg), s, cfg.resource_cap);
                if (!marked) return collect_crossings(path, cfg.level, nullptr);
                const auto marks = detail::sample_marks(path, kernel, s.substream(2));
                return collect_crossings(path, cfg.level, &marks);
            });
    }

    detail::CsvWriter csv("t,A,B,H,U,markval");
    std::vector<double> pooled_u;
    std::vector<double> pooled_h;
    for (const auto& records : per_replica) {
        for (const auto& r : records) {
            auto row = csv.row();
            row.num(r.t).num(r.A).num(r.B).num(r.H).num(r.U);
            if (r.has_mark) row.num(r.markval);
            else row.empty();
            pooled_u.push_back(r.U);
            pooled_h.push_back(r.H);
        }
    }
    csv.save(out_dir + "/crossings.csv");

    nlohmann::json m;
    m["n_crossings"] = pooled_u.size();
    if (!pooled_u.empty()) {
        const KsResult ks = ks_uniform(pooled_u);
        m["ks_d"] = ks.d;
        m["ks_p"] = ks.p;
        // conditional uniformity per decade of the crossing size H
        nlohmann::json decades = nlohmann::json::array();
        std::map<int, std::vector<double>> groups;
        for (std::size_t i = 0; i < pooled_u.size(); ++i) {
            groups[static_cast<int>(std::floor(std::log10(pooled_h[i])))].push_back(pooled_u[i]);
        }
        for (const auto& [dec, us] : groups) {
            if (us.size() < 30) continue;
            const KsResult k2 = ks_uniform(us);
            decades.push_back({{"decade", dec}, {"count", us.size()}, {"ks_p", k2.p}});
        }
        m["decades"] = decades;
    }
    detail::save_summary(out_dir + "/crossings_summary.json", cfg, m,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return 0;
}

inline int run_rates(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const StableParams params{cfg.alpha, cfg.a};
    const MarkKernel kernel = detail::kernel_of(cfg);
    const auto h_list = detail::make_h_list(cfg);

    struct ReplicaCounts {
        std::vector<std::size_t> mark, corridor, jumpsize;
        double local_time = 0.0;
    };
    const auto per_replica = parallel_map_indexed<ReplicaCounts>(
        cfg.replicas, detail::effective_threads(cfg), [&](std::size_t r) {
            RngStream s(cfg.seed, r);
            const PathSkeleton path = simulate_path(params, cfg.T, cfg.eps, cfg.dt,
                                                    detail::mode_of(cfg), s, cfg.resource_cap);
            const auto marks = detail::sample_marks(path, kernel, s.substream(2));
            const auto records = collect_crossings(path, cfg.level, &marks);
            const LocalTimeField field = occupation_local_time(
                path, {cfg.level}, cfg.bandwidth, {path.T});
            ReplicaCounts rc;
            rc.local_time = field.ell[0][0];
            for (double h : h_list) {
                rc.mark.push_back(count_estimator(records, h, EstimatorKind::Mark, path.T));
                rc.corridor.push_back(count_estimator(records, h, EstimatorKind::Corridor, path.T));
                rc.jumpsize.push_back(count_estimator(records, h, EstimatorKind::JumpSize, path.T));
            }
            return rc;
        });

    double lt = 0.0;
    std::vector<std::size_t> mark(h_list.size(), 0), corridor(h_list.size(), 0),
        jumpsize(h_list.size(), 0);
    for (const auto& rc : per_replica) {
        lt += rc.local_time;
        for (std::size_t k = 0; k < h_list.size(); ++k) {
            mark[k] += rc.mark[k];
            corridor[k] += rc.corridor[k];
            jumpsize[k] += rc.jumpsize[k];
        }
    }
    if (!(lt > 0.0)) throw std::runtime_error("rates: pooled local time is zero");

    detail::CsvWriter csv("kind,h,count,local_time,rate");
    const auto emit = [&](const char* name, const std::vector<std::size_t>& counts) {
        for (std::size_t k = 0; k < h_list.size(); ++k) {
            csv.row()
                .text(name)
                .num(h_list[k])
                .integer(static_cast<long long>(counts[k]))
                .num(lt)
                .num(static_cast<double>(counts[k]) / lt);
        }
    };
    emit("MARK", mark);
    emit("CORRIDOR", corridor);
    emit("JUMPSIZE", jumpsize);
    csv.save(out_dir + "/rates.csv");

    const auto fit_of = [&](const std::vector<std::size_t>& counts, nlohmann::json& j, double expo) {
        std::vector<double> lx, ly, consts;
        for (std::size_t k = 0; k < h_list.size(); ++k) {
            if (counts[k] == 0) continue;
            const double rate = static_cast<double>(counts[k]) / lt;
            lx.push_back(std::log(h_list[k]));
            ly.push_back(std::log(rate));
            consts.push_back(rate * std::pow(h_list[k], expo));
        }
        if (lx.size() >= 3) {
            const LineFit f = slope_fit(lx, ly);
            j["slope"] = f.slope;
            j["slope_stderr"] = f.stderr_slope;
        }
        double cbar = 0.0;
        for (double c : consts) cbar += c;
        j["constant_estimate"] = consts.empty() ? 0.0 : cbar / static_cast<double>(consts.size());
    };

    nlohmann::json m;
    const double g1a = gamma_fn(1.0 - cfg.alpha);
    {
        nlohmann::json j;
        fit_of(mark, j, cfg.alpha / kernel.q);
        j["constant_expected"] = cfg.a * mark_constant_c(kernel, cfg.alpha);
        m["MARK"] = j;
    }
    {
        nlohmann::json j;
        fit_of(corridor, j, cfg.alpha);
        m["CORRIDOR"] = j;
    }
    {
        nlohmann::json j;
        fit_of(jumpsize, j, cfg.alpha);
        const double cand_plain = cfg.a * (1.0 + cfg.alpha) / g1a;
        const double cand_alpha = cfg.a * (1.0 + cfg.alpha) * cfg.alpha / g1a;
        j["candidate_without_alpha"] = cand_plain;
        j["candidate_with_alpha"] = cand_alpha;
        const double est = j["constant_estimate"].get<double>();
        const double rel_plain = std::fabs(est - cand_plain) / cand_plain;
        const double rel_alpha = std::fabs(est - cand_alpha) / cand_alpha;
        j["rel_diff_without_alpha"] = rel_plain;
        j["rel_diff_with_alpha"] = rel_alpha;
        j["matches"] = rel_plain <= rel_alpha ? "without_alpha" : "with_alpha";
        m["JUMPSIZE"] = j;
    }
    m["pooled_local_time"] = lt;
    detail::save_summary(out_dir + "/rates_summary.json", cfg, m,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return 0;
}

inline int run_piling(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const StableParams params{cfg.alpha, cfg.a};
    const PathSkeleton path = simulate_path(params, cfg.T, cfg.eps, cfg.dt, detail::mode_of(cfg),
                                            RngStream(cfg.seed, 0), cfg.resource_cap);
    const PileSet ps = pile_jumps(path.jumps);
    const bool valid = pile_set_valid(ps);

    detail::CsvWriter csv("k,pile_size,max_jump");
    std::vector<double> lk, lmax;
    for (std::size_t k = 0; k < ps.piles.size(); ++k) {
        const double mx = path.jumps[ps.piles[k].front()].dx;
        csv.row()
            .integer(static_cast<long long>(k + 1))
            .integer(static_cast<long long>(ps.piles[k].size()))
            .num(mx);
        const std::size_t kk = k + 1;
        if (kk >= 5 && kk <= ps.piles.size() / 2) {
            lk.push_back(std::log(static_cast<double>(kk)));
            lmax.push_back(std::log(mx));
        }
    }
    csv.save(out_dir + "/piling.csv");

    nlohmann::json m;
    m["invariants_ok"] = valid;
    m["jump_count"] = path.jumps.size();
    m["pile_count"] = ps.piles.size();
    if (lk.size() >= 3) {
        const LineFit f = slope_fit(lk, lmax);
        m["decay_slope"] = f.slope;
        m["decay_slope_stderr"] = f.stderr_slope;
        m["decay_slope_expected"] = -1.0 / cfg.alpha;
    }
    detail::save_summary(out_dir + "/piling_summary.json", cfg, m,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return valid ? 0 : 2;
}

inline int run_besq(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Case {
        double delta, x0, s;
    };
    const std::vector<Case> cases = {{0.0, 0.0, 1.0}, {1.0, 0.0, 1.0}, {2.0, 3.0, 0.5}, {5.0, 2.0, 0.25}};

    detail::CsvWriter csv("delta,x0,s,stat,observed,expected,stderr");
    nlohmann::json rows = nlohmann::json::array();
    bool all_ok = true;
    RngStream stream(cfg.seed, 0);
    for (const auto& c : cases) {
        const double n = static_cast<double>(cfg.mc_samples);
        double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
        for (std::size_t i = 0; i < cfg.mc_samples; ++i) {
            const double v = c.s * sample_ncchisq(c.delta, c.x0 / c.s, stream);
            sum += v;
            sum2 += v * v;
            sum3 += v * v * v;
            sum4 += v * v * v * v;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        const double mean_expected = c.x0 + c.delta * c.s;
        const double var_expected = 4.0 * c.x0 * c.s + 2.0 * c.delta * c.s * c.s;
        const double mean_se = std::sqrt(std::max(var, 0.0) / n);
        // se of the sample variance from the fourth central moment
        const double m2 = var;
        const double m4 = sum4 / n - 4.0 * mean * sum3 / n + 6.0 * mean * mean * sum2 / n -
                          3.0 * mean * mean * mean * mean;
        const double var_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);

        csv.row().num(c.delta).num(c.x0).num(c.s).text("mean").num(mean).num(mean_expected).num(mean_se);
        csv.row().num(c.delta).num(c.x0).num(c.s).text("variance").num(var).num(var_expected).num(var_se);
        const bool mean_ok = std::fabs(mean - mean_expected) <= std::max(3.0 * mean_se, 1e-12);
        const bool var_ok = std::fabs(var - var_expected) <= std::max(3.0 * var_se, 1e-12);
        all_ok = all_ok && mean_ok && var_ok;
        rows.push_back({{"delta", c.delta},
                        {"x0", c.x0},
                        {"s", c.s},
                        {"mean_ok", mean_ok},
                        {"variance_ok", var_ok}});
    }
    csv.save(out_dir + "/besq.csv");

    nlohmann::json m;
    m["cases"] = rows;
    m["all_within_3se"] = all_ok;
    detail::save_summary(out_dir + "/besq_summary.json", cfg, m,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return all_ok ? 0 : 2;
}

inline int run_specfun_check(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> alphas = {0.3, 0.5, 0.7};
    const std::vector<double> bs = {0.5, 1.0, 2.0};
    const std::vector<double> qs = {0.1, 0.5, 1.0, 2.0, 5.0};

    detail::CsvWriter csv("alpha,b,q,theta_closed,theta_integral,rel_diff");
    double max_rel = 0.0;
    for (double alpha : alphas) {
        for (double b : bs) {
            for (double q : qs) {
                const double closed = theta_b_closed(alpha, 1.0, b, q);
                const double integral = theta_b_integral(alpha, 1.0, b, q);
                const double rel = std::fabs(closed - integral) / std::fabs(closed);
                max_rel = std::max(max_rel, rel);
                csv.row().num(alpha).num(b).num(q).num(closed).num(integral).num(rel);
            }
        }
    }
    csv.save(out_dir + "/specfun.csv");

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json m;
    m["max_rel_diff"] = max_rel;
    m["threshold"] = 1e-8;
    detail::save_summary(out_dir + "/specfun_summary.json", cfg, m, wall);
    return max_rel < 1e-8 ? 0 : 2;
}

inline int run_restricted(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const StableParams params{cfg.alpha, cfg.a};
    const SigmaBResult res =
        sigma_b_experiment(params, cfg.b, cfg.q_list, cfg.replicas, cfg.bandwidth, cfg.eps, cfg.T,
                           cfg.seed, detail::effective_threads(cfg));

    detail::CsvWriter csv("q,empirical_exponent,theta_b,rel_diff,censored_frac");
    for (std::size_t k = 0; k < res.q.size(); ++k) {
        csv.row()
            .num(res.q[k])
            .num(res.empirical[k])
            .num(res.theta[k])
            .num(res.rel_diff[k])
            .num(res.censored_frac);
    }
    csv.save(out_dir + "/restricted.csv");

    nlohmann::json m;
    m["censored_frac"] = res.censored_frac;
    m["censored_count"] = res.censored_count;
    m["horizon"] = res.horizon;
    detail::save_summary(out_dir + "/restricted_summary.json", cfg, m,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return res.censored_frac <= 0.05 ? 0 : 2;
}

inline int run_scaling(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const StableParams params{cfg.alpha, cfg.a};
    std::vector<std::pair<double, double>> pairs;
    double sep = cfg.sep_min;
    for (int k = 0; k < cfg.sep_count; ++k) {
        pairs.emplace_back(-0.5 * sep, 0.5 * sep);
        sep *= cfg.sep_factor;
    }
    const IncrementScalingResult res = increment_scaling(
        params, pairs, cfg.p, cfg.T, cfg.replicas, cfg.eps, cfg.dt, cfg.bandwidth, cfg.seed,
        detail::effective_threads(cfg), detail::mode_of(cfg));

    detail::CsvWriter csv("sep,p,moment_estimate,stderr");
    for (std::size_t k = 0; k < res.separations.size(); ++k) {
        csv.row().num(res.separations[k]).num(cfg.p).num(res.moments[k]).num(res.stderrs[k]);
    }
    csv.save(out_dir + "/scaling.csv");

    nlohmann::json m;
    m["exponent"] = res.exponent;
    m["exponent_stderr"] = res.exponent_stderr;
    m["exponent_expected"] = cfg.p * cfg.alpha / 2.0;
    detail::save_summary(out_dir + "/scaling_summary.json", cfg, m,
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    return 0;
}

inline int run_experiment(const std::string& subcommand, const ExperimentConfig& cfg,
                          const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (subcommand == "simulate") return run_simulate(cfg, out_dir);
    if (subcommand == "theorem1") return run_theorem1(cfg, out_dir);
    if (subcommand == "crossings") return run_crossings(cfg, out_dir);
    if (subcommand == "rates") return run_rates(cfg, out_dir);
    if (subcommand == "piling") return run_piling(cfg, out_dir);
    if (subcommand == "besq") return run_besq(cfg, out_dir);
    if (subcommand == "specfun-check") return run_specfun_check(cfg, out_dir);
    if (subcommand == "restricted") return run_restricted(cfg, out_dir);
    if (subcommand == "scaling") return run_scaling(cfg, out_dir);
    throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
}

} // namespace slt
