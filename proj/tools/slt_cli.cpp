// Command-line driver for the experiment suite.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "slt/config.hpp"
#include "slt/experiments.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slt: simulation and numerical verification of marked stable-process local times"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 0;

    app.add_option("--config", config_path, "config file (key=value lines, # comments)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--threads", threads, "override the config worker count");

    const char* names[] = {"simulate", "theorem1",      "crossings",  "rates",  "piling",
                           "besq",     "specfun-check", "restricted", "scaling"};
    for (const char* n : names) app.add_subcommand(n);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        slt::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = slt::parse_config(read_file(config_path));
        if (seed_set) cfg.seed = seed;
        if (threads >= 1) cfg.threads = threads;
        const std::string sub = app.get_subcommands().front()->get_name();
        return slt::run_experiment(sub, cfg, out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
