#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "slt/quad.hpp"
#include "slt/rng.hpp"
#include "slt/stablepath.hpp"

using namespace slt;

namespace {

// quadrature of the jump density over (x, inf) through z = x e^s
double tail_oracle(double alpha, double x) {
    const double c = (1.0 + alpha) * alpha / gamma_fn(1.0 - alpha);
    return integrate_gk(
        [&](double s) {
            const double z = x * std::exp(s);
            return c * std::pow(z, -alpha - 2.0) * z;
        },
        0.0, 120.0, 1e-13);
}

PathSkeleton small_path(double T = 1.0, double eps = 0.01, double dt = 1e-3,
                        SmallJumpMode mode = SmallJumpMode::DriftOnly, std::uint64_t seed = 5) {
    return simulate_path({0.5, 1.0}, T, eps, dt, mode, RngStream(seed, 0));
}

} // namespace

TEST_CASE("levy tail against quadrature oracle", "[stablepath]") {
    REQUIRE(levy_tail(0.5, 1.0) == Catch::Approx(0.5 / std::sqrt(M_PI)).epsilon(1e-12));
    for (double x : {0.3, 1.0, 4.0}) {
        REQUIRE(levy_tail(0.5, x) == Catch::Approx(tail_oracle(0.5, x)).epsilon(1e-8));
    }
    REQUIRE(levy_tail(0.5, 10.0) < levy_tail(0.5, 5.0));
    REQUIRE(levy_tail(0.5, 1e8) < 1e-10);
    REQUIRE_THROWS_AS(levy_tail(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("integrated levy tail", "[stablepath]") {
    REQUIRE(levy_double_tail(0.5, 1.0) == Catch::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-12));
    // quadrature of levy_tail over (x, inf) via the same exponential substitution
    const double quad = integrate_gk(
        [&](double s) {
            const double z = std::exp(s);
            return levy_tail(0.5, z) * z;
        },
        0.0, 120.0, 1e-13);
    REQUIRE(levy_double_tail(0.5, 1.0) == Catch::Approx(quad).epsilon(1e-8));
    // derivative check: -(F(x+h) - F(x-h)) / 2h ~ levy_tail(x)
    const double x = 0.7, h = 1e-4;
    const double fd = -(levy_double_tail(0.5, x + h) - levy_double_tail(0.5, x - h)) / (2.0 * h);
    REQUIRE(fd == Catch::Approx(levy_tail(0.5, x)).epsilon(1e-5));
    REQUIRE(levy_double_tail(0.5, 1e9) < 1e-4);
}

TEST_CASE("compensator drift equals the truncated first moment", "[stablepath]") {
    REQUIRE(compensator_drift(0.5, 1.0) == Catch::Approx(1.5 / std::sqrt(M_PI)).epsilon(1e-12));
    REQUIRE(compensator_drift(0.5, 0.01) == Catch::Approx(15.0 / std::sqrt(M_PI)).epsilon(1e-12));
    for (double eps : {1.0, 0.01}) {
        const double c = (1.0 + 0.5) * 0.5 / gamma_fn(0.5);
        const double quad = integrate_gk(
            [&](double s) {
                const double z = eps * std::exp(s);
                return c * z * std::pow(z, -2.5) * z;
            },
            0.0, 200.0, 1e-13);
        REQUIRE(compensator_drift(0.5, eps) == Catch::Approx(quad).epsilon(1e-8));
    }
    // diverges like eps^{-alpha}
    REQUIRE(compensator_drift(0.5, 0.5e-4) / compensator_drift(0.5, 1e-4) ==
            Catch::Approx(std::pow(2.0, 0.5)).epsilon(1e-12));
}

TEST_CASE("small-jump variance equals the truncated second moment", "[stablepath]") {
    REQUIRE(small_jump_variance(0.5, 1.0) == Catch::Approx(1.5 / std::sqrt(M_PI)).epsilon(1e-12));
    REQUIRE(small_jump_variance(0.5, 1e-4) == Catch::Approx(0.015 / std::sqrt(M_PI)).epsilon(1e-12));
    for (double eps : {1.0, 0.2}) {
        const double c = (1.0 + 0.5) * 0.5 / gamma_fn(0.5);
        // int_0^eps x^2 Pi(dx) via x = eps e^{-s}
        const double quad = integrate_gk(
            [&](double s) {
                const double z = eps * std::exp(-s);
                return c * z * z * std::pow(z, -2.5) * z;
            },
            0.0, 200.0, 1e-13);
        REQUIRE(small_jump_variance(0.5, eps) == Catch::Approx(quad).epsilon(1e-8));
    }
    REQUIRE(small_jump_variance(0.5, 1e-12) < 1e-5);
}

TEST_CASE("simulated skeleton is deterministic and satisfies its invariants", "[stablepath]") {
    const auto p1 = small_path();
    const auto p2 = small_path();
    REQUIRE(p1.values == p2.values);
    REQUIRE(p1.jumps.size() == p2.jumps.size());
    for (std::size_t i = 0; i < p1.jumps.size(); ++i) {
        REQUIRE(p1.jumps[i].t == p2.jumps[i].t);
        REQUIRE(p1.jumps[i].dx == p2.jumps[i].dx);
        REQUIRE(p1.jumps[i].x_pre == p2.jumps[i].x_pre);
    }

    REQUIRE(p1.values[0] == 0.0);
    for (std::size_t i = 1; i < p1.jumps.size(); ++i) {
        REQUIRE(p1.jumps[i].t > p1.jumps[i - 1].t);
    }
    for (const auto& j : p1.jumps) REQUIRE(j.dx > p1.eps);

    // the grid value just after a jump reflects the jump
    const auto gauss = small_path(1.0, 0.01, 1e-3, SmallJumpMode::Gaussian);
    REQUIRE(gauss.values != p1.values);
}

TEST_CASE("simulated jump count matches the levy tail", "[stablepath]") {
    const double expected = levy_tail(0.5, 1e-3) * 1.0;
    REQUIRE(expected == Catch::Approx(0.5 * std::pow(10.0, 4.5) / std::sqrt(M_PI)).epsilon(1e-12));
    const auto path = simulate_path({0.5, 1.0}, 1.0, 1e-3, 1e-2, SmallJumpMode::DriftOnly,
                                    RngStream(21, 0));
    REQUIRE(std::fabs(static_cast<double>(path.jumps.size()) - expected) <
            3.0 * std::sqrt(expected));

    // time-scale factor multiplies the intensity
    const auto path2 = simulate_path({0.5, 4.0}, 1.0, 1e-2, 1e-2, SmallJumpMode::DriftOnly,
                                     RngStream(22, 0));
    const double expected2 = 4.0 * levy_tail(0.5, 1e-2);
    REQUIRE(std::fabs(static_cast<double>(path2.jumps.size()) - expected2) <
            3.0 * std::sqrt(expected2));
}

TEST_CASE("resource cap refuses huge jump counts", "[stablepath]") {
    REQUIRE_THROWS_WITH(
        simulate_path({0.5, 1.0}, 1.0, 1e-8, 1e-3, SmallJumpMode::DriftOnly, RngStream(1, 0), 1e6),
        Catch::Matchers::ContainsSubstring("expected jump count"));
}

TEST_CASE("compensation keeps the path mean at zero", "[stablepath]") {
    // median of means over group averages of X_T
    const int groups = 20, per_group = 100;
    std::vector<double> means;
    for (int g = 0; g < groups; ++g) {
        double acc = 0.0;
        for (int r = 0; r < per_group; ++r) {
            const auto path = simulate_path({0.5, 1.0}, 1.0, 1e-2, 0.5, SmallJumpMode::DriftOnly,
                                            RngStream(777, g * per_group + r));
            acc += path.values.back();
        }
        means.push_back(acc / per_group);
    }
    std::sort(means.begin(), means.end());
    const double median = 0.5 * (means[9] + means[10]);
    double mu = 0.0, var = 0.0;
    for (double m : means) mu += m;
    mu /= groups;
    for (double m : means) var += (m - mu) * (m - mu);
    var /= (groups - 1);
    const double spread = std::sqrt(var / groups);
    REQUIRE(std::fabs(median) < 5.0 * spread);
}

TEST_CASE("occupation local time contract on a constant path", "[stablepath]") {
    PathSkeleton path;
    path.params = {0.5, 1.0};
    path.T = 1.0;
    path.eps = 1.0;
    path.dt = 0.25;
    path.values = {0.0, 0.0, 0.0, 0.0, 0.0};
    const double w = 0.1;
    const auto field = occupation_local_time(path, {0.0}, w, {0.0, 0.5, 1.0});
    REQUIRE(field.ell[0][0] == 0.0);
    REQUIRE(field.ell[0][1] == Catch::Approx(0.5 / w).epsilon(1e-12));
    REQUIRE(field.ell[0][2] == Catch::Approx(1.0 / w).epsilon(1e-12));
}

TEST_CASE("occupation field is monotone and tiles the horizon", "[stablepath]") {
    const auto path = small_path(1.0, 0.01, 1e-3);
    double lo = 0.0, hi = 0.0;
    for (double v : path.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (const auto& j : path.jumps) hi = std::max(hi, j.x_pre + j.dx);

    const double w = 0.05;
    std::vector<double> levels;
    for (double y = lo - 2.0 * w + 0.5 * w; y < hi + 2.0 * w; y += w) levels.push_back(y);
    const std::vector<double> times = {0.0, 0.25, 0.5, 0.75, 1.0};
    const auto field = occupation_local_time(path, levels, w, times);

    for (std::size_t i = 0; i < levels.size(); ++i) {
        for (std::size_t j = 1; j < times.size(); ++j) {
            REQUIRE(field.ell[i][j] >= field.ell[i][j - 1]);
        }
    }
    // bins tile the range: w * sum_i ell_i(T) recovers T
    double total = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) total += field.ell[i].back();
    REQUIRE(w * total == Catch::Approx(path.T).margin(1e-9));
}

TEST_CASE("inverse local time inverts the step function", "[stablepath]") {
    LocalTimeField field;
    field.level_grid = {0.0};
    field.time_grid = {0.0, 0.1, 0.2, 0.3, 0.4};
    field.bandwidth = 0.1;
    field.ell = {{0.0, 0.1, 0.2, 0.3, 0.4}};
    REQUIRE(inverse_local_time(field, 0.0, 0.25) == Catch::Approx(0.3));
    REQUIRE(inverse_local_time(field, 0.0, 1.0) == std::numeric_limits<double>::infinity());
    REQUIRE_THROWS_AS(inverse_local_time(field, 0.5, 0.1), std::invalid_argument);

    // constant path at 0: s = 0 inverts to the first positive grid time
    PathSkeleton path;
    path.params = {0.5, 1.0};
    path.T = 1.0;
    path.eps = 1.0;
    path.dt = 0.25;
    path.values = {0.0, 0.0, 0.0, 0.0, 0.0};
    const auto f2 = occupation_local_time(path, {0.0}, 0.1, {0.0, 0.25, 0.5, 0.75, 1.0});
    REQUIRE(inverse_local_time(f2, 0.0, 0.0) == Catch::Approx(0.25));
}

TEST_CASE("first passage basics", "[stablepath]") {
    const auto path = small_path(1.0, 0.01, 1e-3);
    REQUIRE(first_passage(path, 0.0) == 0.0);
    // nested level sets
    const double t1 = first_passage(path, -0.05);
    const double t2 = first_passage(path, -0.1);
    REQUIRE(t2 >= t1);
    // downward passage time matches the drift slope on a jump-free stretch
    PathSkeleton flat;
    flat.params = {0.5, 1.0};
    flat.T = 1.0;
    flat.eps = 1.0;
    flat.dt = 0.5;
    const double mu = flat.drift();
    flat.values = {0.0, -0.5 * mu, -mu};
    REQUIRE(first_passage(flat, -0.3 * mu) == Catch::Approx(0.3).epsilon(1e-9));
    REQUIRE(first_passage(flat, -2.0 * mu) == std::numeric_limits<double>::infinity());
}

TEST_CASE("passage probability before an exponential clock", "[stablepath]") {
    // P(T_{-ln 2} < lambda) = 1/2 for lambda ~ Exp(1)
    const double y = std::log(2.0);
    const int n = 4000;
    int hits = 0;
    for (int r = 0; r < n; ++r) {
        RngStream s(3141, r);
        RngStream clock = s.substream(9);
        const double lambda = clock.exponential(1.0);
        const double horizon = std::min(lambda, 12.0);
        const auto path = simulate_path({0.5, 1.0}, horizon + 1e-3, 1e-3, 1e-2,
                                        SmallJumpMode::Gaussian, s);
        if (first_passage(path, -y) < lambda) ++hits;
    }
    const double p = static_cast<double>(hits) / n;
    const double se = std::sqrt(0.25 / n);
    REQUIRE(std::fabs(p - 0.5) < 4.0 * se);
}

TEST_CASE("hitting time of a positive level needs the downward crossing", "[stablepath]") {
    PathSkeleton path;
    path.params = {0.5, 1.0};
    path.T = 2.0;
    path.eps = 1.0;
    path.dt = 0.5;
    const double mu = path.drift();
    // one jump at t = 0.25 from -mu/4 up over the level y = 1
    path.jumps = {{0.25, -0.25 * mu, 2.0}};
    path.values = {0.0, 2.0 - 0.5 * mu, 2.0 - mu, 2.0 - 1.5 * mu, 2.0 - 2.0 * mu};
    const double y = 1.0;
    const double t_pass = first_passage(path, y);
    const double t_hit = hitting_time(path, y);
    REQUIRE(t_pass == Catch::Approx(0.25));                       // crossing by the jump
    const double v_after = 2.0 - 0.25 * mu;
    const double expect_hit = 0.25 + (v_after - y) / mu;          // drift back down to y
    REQUIRE(t_hit == Catch::Approx(expect_hit).epsilon(1e-9));
    REQUIRE(t_hit > t_pass);
}
