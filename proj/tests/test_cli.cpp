#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "slt/config.hpp"
#include "slt/experiments.hpp"
#include "slt/skeleton_io.hpp"

using namespace slt;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "slt_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("config parsing applies defaults and rejects bad input", "[cli]") {
    const auto cfg = parse_config("alpha=0.5\nseed=7\n");
    REQUIRE(cfg.alpha == 0.5);
    REQUIRE(cfg.seed == 7);
    REQUIRE(cfg.eps == 1e-3);       // default untouched
    REQUIRE(cfg.kernel == "hat");   // default untouched

    REQUIRE_THROWS_WITH(parse_config("alpha=1.5\n"), Catch::Matchers::ContainsSubstring("line 1"));
    REQUIRE_THROWS_WITH(parse_config("# ok\nnope=3\n"), Catch::Matchers::ContainsSubstring("unknown key"));
    REQUIRE_THROWS_WITH(parse_config("alpha 0.5\n"), Catch::Matchers::ContainsSubstring("key=value"));
    REQUIRE_THROWS_AS(parse_config("eps=-1\n"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_config("alpha=zz\n"), std::invalid_argument);

    // comments and blank lines are fine
    const auto cfg2 = parse_config("# comment\n\n  b = 2.0  # inline\n");
    REQUIRE(cfg2.b == 2.0);
}

TEST_CASE("config round-trips through serialization", "[cli]") {
    ExperimentConfig cfg;
    cfg.alpha = 0.37;
    cfg.eps = 1.25e-4;
    cfg.q_list = {0.1, 1.0, 2.5};
    cfg.kernel = "besq";
    cfg.seed = 987654321;
    cfg.dump_skeleton = true;
    const auto text = serialize_config(cfg);
    const auto back = parse_config(text);
    REQUIRE(back == cfg);
    REQUIRE(serialize_config(back) == text);
}

TEST_CASE("crossings with zero horizon writes a header-only csv", "[cli]") {
    const auto dir = tmp_dir("t0");
    ExperimentConfig cfg;
    cfg.T = 0.0;
    cfg.replicas = 3;
    const int code = run_experiment("crossings", cfg, dir);
    REQUIRE(code == 0);
    REQUIRE(slurp(dir + "/crossings.csv") == "t,A,B,H,U,markval\n");
}

TEST_CASE("experiments are byte-identical across worker counts", "[cli]") {
    ExperimentConfig cfg;
    cfg.T = 2.0;
    cfg.eps = 0.01;
    cfg.dt = 1e-3;
    cfg.replicas = 6;
    cfg.seed = 2024;
    cfg.level = 0.1;
    cfg.bandwidth = 0.05;

    const auto d1 = tmp_dir("w1");
    const auto d2 = tmp_dir("w2");
    cfg.threads = 1;
    REQUIRE(run_experiment("crossings", cfg, d1) == 0);
    cfg.threads = 3;
    REQUIRE(run_experiment("crossings", cfg, d2) == 0);
    REQUIRE(slurp(d1 + "/crossings.csv") == slurp(d2 + "/crossings.csv"));

    cfg.threads = 1;
    REQUIRE(run_experiment("rates", cfg, d1) == 0);
    cfg.threads = 3;
    REQUIRE(run_experiment("rates", cfg, d2) == 0);
    REQUIRE(slurp(d1 + "/rates.csv") == slurp(d2 + "/rates.csv"));
}

TEST_CASE("unknown subcommand is a usage error", "[cli]") {
    ExperimentConfig cfg;
    REQUIRE_THROWS_AS(run_experiment("frobnicate", cfg, tmp_dir("bad")), std::invalid_argument);
}

TEST_CASE("specfun check passes its own threshold", "[cli]") {
    const auto dir = tmp_dir("spec");
    ExperimentConfig cfg;
    REQUIRE(run_experiment("specfun-check", cfg, dir) == 0);
    const auto body = slurp(dir + "/specfun.csv");
    REQUIRE(body.rfind("alpha,b,q,theta_closed,theta_integral,rel_diff\n", 0) == 0);
    // 3 alphas x 3 bs x 5 qs = 45 data rows
    REQUIRE(std::count(body.begin(), body.end(), '\n') == 46);
}

TEST_CASE("skeleton dump round-trips", "[cli]") {
    const auto dir = tmp_dir("skel");
    const auto path = simulate_path({0.5, 1.0}, 0.5, 0.01, 0.01, SmallJumpMode::Gaussian,
                                    RngStream(31337, 2));
    dump_skeleton(path, dir + "/s.bin");
    const auto back = load_skeleton(dir + "/s.bin");
    REQUIRE(back.params.alpha == path.params.alpha);
    REQUIRE(back.params.a == path.params.a);
    REQUIRE(back.T == path.T);
    REQUIRE(back.eps == path.eps);
    REQUIRE(back.dt == path.dt);
    REQUIRE(back.mode == path.mode);
    REQUIRE(back.master_seed == path.master_seed);
    REQUIRE(back.stream_index == path.stream_index);
    REQUIRE(back.values == path.values);
    REQUIRE(back.jumps.size() == path.jumps.size());
    for (std::size_t i = 0; i < back.jumps.size(); ++i) {
        REQUIRE(back.jumps[i].t == path.jumps[i].t);
        REQUIRE(back.jumps[i].x_pre == path.jumps[i].x_pre);
        REQUIRE(back.jumps[i].dx == path.jumps[i].dx);
    }
    REQUIRE_THROWS_AS(load_skeleton(dir + "/missing.bin"), std::runtime_error);
}
