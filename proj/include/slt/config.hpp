#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace slt {

// Experiment configuration, parsed from `key=value` lines with `#` comments.
// Unknown keys are rejected; omitted keys keep their defaults.
struct ExperimentConfig {
    double alpha = 0.5;
    double a = 1.0;
    double T = 1.0;
    double eps = 1e-3;
    double dt = 1e-4;
    double bandwidth = 0.02;
    double level_min = -1.0;
    double level_max = 1.0;
    double level_step = 0.05;
    double time_step = 0.1;
    double h0 = 0.2;
    double h_factor = 0.5;
    int h_count = 6;
    std::string kernel = "hat";  // hat | besq | none
    int mark_resolution = 64;
    double b = 1.0;
    std::vector<double> q_list = {1.0};
    std::uint64_t seed = 42;
    std::size_t replicas = 100;
    unsigned threads = 1;
    double level = 0.3;
    std::string small_jump_mode = "gaussian";  // drift | gaussian
    double p = 2.0;
    double sep_min = 0.02;
    double sep_factor = 2.0;
    int sep_count = 6;
    std::size_t mc_samples = 100000;
    double resource_cap = 1e8;
    bool dump_skeleton = false;
};

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + msg);
    };
    auto to_double = [&](const std::string& v) {
        std::size_t pos = 0;
        double d;
        try {
            d = std::stod(v, &pos);
        } catch (...) {
            fail("not a number: '" + v + "'");
            return 0.0;
        }
        if (pos != v.size()) fail("trailing characters in number: '" + v + "'");
        return d;
    };
    auto to_u64 = [&](const std::string& v) -> std::uint64_t {
        try {
            return std::stoull(v);
        } catch (...) {
            fail("not an unsigned integer: '" + v + "'");
            return 0;
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");

        if (key == "alpha") cfg.alpha = to_double(val);
        else if (key == "a") cfg.a = to_double(val);
        else if (key == "T") cfg.T = to_double(val);
        else if (key == "eps") cfg.eps = to_double(val);
        else if (key == "dt") cfg.dt = to_double(val);
        else if (key == "bandwidth") cfg.bandwidth = to_double(val);
        else if (key == "level_min") cfg.level_min = to_double(val);
        else if (key == "level_max") cfg.level_max = to_double(val);
        else if (key == "level_step") cfg.level_step = to_double(val);
        else if (key == "time_step") cfg.time_step = to_double(val);
        else if (key == "h0") cfg.h0 = to_double(val);
        else if (key == "h_factor") cfg.h_factor = to_double(val);
        else if (key == "h_count") cfg.h_count = static_cast<int>(to_u64(val));
        else if (key == "kernel") cfg.kernel = val;
        else if (key == "mark_resolution") cfg.mark_resolution = static_cast<int>(to_u64(val));
        else if (key == "b") cfg.b = to_double(val);
        else if (key == "q_list") {
            cfg.q_list.clear();
            std::istringstream qs(val);
            std::string item;
            while (std::getline(qs, item, ',')) {
                item = detail::trim(item);
                if (item.empty()) fail("empty entry in q_list");
                cfg.q_list.push_back(to_double(item));
            }
            if (cfg.q_list.empty()) fail("q_list must not be empty");
        } else if (key == "seed") cfg.seed = to_u64(val);
        else if (key == "replicas") cfg.replicas = to_u64(val);
        else if (key == "threads") cfg.threads = static_cast<unsigned>(to_u64(val));
        else if (key == "level") cfg.level = to_double(val);
        else if (key == "small_jump_mode") cfg.small_jump_mode = val;
        else if (key == "p") cfg.p = to_double(val);
        else if (key == "sep_min") cfg.sep_min = to_double(val);
        else if (key == "sep_factor") cfg.sep_factor = to_double(val);
        else if (key == "sep_count") cfg.sep_count = static_cast<int>(to_u64(val));
        else if (key == "mc_samples") cfg.mc_samples = to_u64(val);
        else if (key == "resource_cap") cfg.resource_cap = to_double(val);
        else if (key == "dump_skeleton") {
            if (val == "true" || val == "1") cfg.dump_skeleton = true;
            else if (val == "false" || val == "0") cfg.dump_skeleton = false;
            else fail("dump_skeleton must be true/false");
        } else fail("unknown key '" + key + "'");

        // domain checks that name the offending line
        if (key == "alpha" && !(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("alpha must be in (0,1)");
        if (key == "a" && !(cfg.a > 0.0)) fail("a must be > 0");
        if (key == "T" && !(cfg.T >= 0.0)) fail("T must be >= 0");
        if (key == "eps" && !(cfg.eps > 0.0)) fail("eps must be > 0");
        if (key == "dt" && !(cfg.dt > 0.0)) fail("dt must be > 0");
        if (key == "bandwidth" && !(cfg.bandwidth > 0.0)) fail("bandwidth must be > 0");
        if (key == "level_step" && !(cfg.level_step > 0.0)) fail("level_step must be > 0");
        if (key == "time_step" && !(cfg.time_step > 0.0)) fail("time_step must be > 0");
        if (key == "h0" && !(cfg.h0 > 0.0)) fail("h0 must be > 0");
        if (key == "h_factor" && !(cfg.h_factor > 0.0 && cfg.h_factor < 1.0)) fail("h_factor must be in (0,1)");
        if (key == "h_count" && cfg.h_count < 1) fail("h_count must be >= 1");
        if (key == "kernel" && cfg.kernel != "hat" && cfg.kernel != "besq" && cfg.kernel != "none")
            fail("kernel must be hat|besq|none");
        if (key == "mark_resolution" && cfg.mark_resolution < 2) fail("mark_resolution must be >= 2");
        if (key == "b" && !(cfg.b > 0.0)) fail("b must be > 0");
        if (key == "q_list") {
            for (double q : cfg.q_list) {
                if (!(q >= 0.0)) fail("q_list entries must be >= 0");
            }
        }
        if (key == "replicas" && cfg.replicas < 1) fail("replicas must be >= 1");
        if (key == "threads" && cfg.threads < 1) fail("threads must be >= 1");
        if (key == "small_jump_mode" && cfg.small_jump_mode != "drift" && cfg.small_jump_mode != "gaussian")
            fail("small_jump_mode must be drift|gaussian");
        if (key == "p" && !(cfg.p >= 1.0)) fail("p must be >= 1");
        if (key == "sep_min" && !(cfg.sep_min > 0.0)) fail("sep_min must be > 0");
        if (key == "sep_factor" && !(cfg.sep_factor > 1.0)) fail("sep_factor must be > 1");
        if (key == "sep_count" && cfg.sep_count < 3) fail("sep_count must be >= 3");
        if (key == "mc_samples" && cfg.mc_samples < 1) fail("mc_samples must be >= 1");
        if (key == "resource_cap" && !(cfg.resource_cap > 0.0)) fail("resource_cap must be > 0");
    }
    return cfg;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    using detail::format_g17;
    out << "alpha=" << format_g17(cfg.alpha) << "\n";
    out << "a=" << format_g17(cfg.a) << "\n";
    out << "T=" << format_g17(cfg.T) << "\n";
    out << "eps=" << format_g17(cfg.eps) << "\n";
    out << "dt=" << format_g17(cfg.dt) << "\n";
    out << "bandwidth=" << format_g17(cfg.bandwidth) << "\n";
    out << "level_min=" << format_g17(cfg.level_min) << "\n";
    out << "level_max=" << format_g17(cfg.level_max) << "\n";
    out << "level_step=" << format_g17(cfg.level_step) << "\n";
    out << "time_step=" << format_g17(cfg.time_step) << "\n";
    out << "h0=" << format_g17(cfg.h0) << "\n";
    out << "h_factor=" << format_g17(cfg.h_factor) << "\n";
    out << "h_count=" << cfg.h_count << "\n";
    out << "kernel=" << cfg.kernel << "\n";
    out << "mark_resolution=" << cfg.mark_resolution << "\n";
    out << "b=" << format_g17(cfg.b) << "\n";
    out << "q_list=";
    for (std::size_t i = 0; i < cfg.q_list.size(); ++i) {
        if (i) out << ",";
        out << format_g17(cfg.q_list[i]);
    }
    out << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "replicas=" << cfg.replicas << "\n";
    out << "threads=" << cfg.threads << "\n";
    out << "level=" << format_g17(cfg.level) << "\n";
    out << "small_jump_mode=" << cfg.small_jump_mode << "\n";
    out << "p=" << format_g17(cfg.p) << "\n";
    out << "sep_min=" << format_g17(cfg.sep_min) << "\n";
    out << "sep_factor=" << format_g17(cfg.sep_factor) << "\n";
    out << "sep_count=" << cfg.sep_count << "\n";
    out << "mc_samples=" << cfg.mc_samples << "\n";
    out << "resource_cap=" << format_g17(cfg.resource_cap) << "\n";
    out << "dump_skeleton=" << (cfg.dump_skeleton ? "true" : "false") << "\n";
    return out.str();
}

inline bool operator==(const ExperimentConfig& lhs, const ExperimentConfig& rhs) {
    return serialize_config(lhs) == serialize_config(rhs);
}

} // namespace slt
