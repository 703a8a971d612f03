#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "slt/estimators.hpp"

using namespace slt;

namespace {

PathSkeleton one_jump_path() {
    PathSkeleton path;
    path.params = {0.5, 1.0};
    path.T = 1.0;
    path.eps = 0.1;
    path.dt = 0.5;
    path.jumps = {{0.25, 0.0, 2.0}};
    const double mu = path.drift();
    path.values = {0.0, 2.0 - 0.5 * mu, 2.0 - mu};
    return path;
}

} // namespace

TEST_CASE("crossing records carry exact undershoot arithmetic", "[estimators]") {
    const auto path = one_jump_path();
    const auto recs = collect_crossings(path, 0.5);
    REQUIRE(recs.size() == 1);
    REQUIRE(recs[0].A == 0.5);
    REQUIRE(recs[0].B == 1.5);
    REQUIRE(recs[0].H == 2.0);
    REQUIRE(recs[0].U == 0.25);
    REQUIRE_FALSE(recs[0].has_mark);

    REQUIRE(collect_crossings(path, 5.0).empty());
    REQUIRE(collect_crossings(path, -1.0).empty());

    const auto sim = simulate_path({0.5, 1.0}, 1.0, 0.01, 1e-2, SmallJumpMode::DriftOnly,
                                   RngStream(17, 0));
    for (const auto& r : collect_crossings(sim, 0.1)) {
        REQUIRE((r.U > 0.0 && r.U < 1.0));
        REQUIRE(r.H == r.A + r.B);
        REQUIRE(r.U == r.A / r.H);
    }
}

TEST_CASE("count estimator predicates", "[estimators]") {
    std::vector<CrossingRecord> recs(1);
    recs[0].t = 0.25;
    recs[0].A = 0.5;
    recs[0].B = 1.5;
    recs[0].H = 2.0;
    recs[0].U = 0.25;

    REQUIRE(count_estimator(recs, 0.5, EstimatorKind::Corridor, 1.0) == 1);
    REQUIRE(count_estimator(recs, 0.6, EstimatorKind::Corridor, 1.0) == 0);
    REQUIRE(count_estimator(recs, 2.0, EstimatorKind::JumpSize, 1.0) == 0);  // strict >
    REQUIRE(count_estimator(recs, 1.9, EstimatorKind::JumpSize, 1.0) == 1);
    REQUIRE(count_estimator(recs, 0.5, EstimatorKind::Corridor, 0.1) == 0);  // before the jump
    REQUIRE_THROWS_AS(count_estimator(recs, 0.5, EstimatorKind::Mark, 1.0), std::logic_error);
    REQUIRE_THROWS_AS(count_estimator(recs, 0.0, EstimatorKind::Corridor, 1.0), std::invalid_argument);

    // hat-marked jump over y = 0.5 carries markval min(A, dx - A) = 0.5
    const auto path = one_jump_path();
    RngStream s(1, 0);
    std::vector<MarkPath> marks = {scale_mark(sample_unit_path(MarkKernel::hat(5), s), 2.0)};
    const auto marked = collect_crossings(path, 0.5, &marks);
    REQUIRE(marked[0].markval == Catch::Approx(0.5).epsilon(1e-14));
    REQUIRE(count_estimator(marked, 0.5, EstimatorKind::Mark, 1.0) == 1);  // >= is inclusive
    REQUIRE(count_estimator(marked, 0.500001, EstimatorKind::Mark, 1.0) == 0);
}

TEST_CASE("counts nest in h and in t and corridor sits inside jump-size", "[estimators]") {
    const auto sim = simulate_path({0.5, 1.0}, 4.0, 0.005, 1e-2, SmallJumpMode::DriftOnly,
                                   RngStream(23, 0));
    RngStream ms(24, 0);
    std::vector<MarkPath> marks;
    for (const auto& j : sim.jumps) {
        marks.push_back(scale_mark(sample_unit_path(MarkKernel::hat(17), ms), j.dx));
    }
    const auto recs = collect_crossings(sim, 0.2, &marks);
    REQUIRE(recs.size() > 8);

    for (EstimatorKind kind : {EstimatorKind::Mark, EstimatorKind::Corridor, EstimatorKind::JumpSize}) {
        std::size_t prev = std::numeric_limits<std::size_t>::max();
        for (double h : {0.01, 0.02, 0.04, 0.08, 0.16}) {
            const std::size_t c = count_estimator(recs, h, kind, 2.0);
            REQUIRE(c <= prev);
            prev = c;
        }
        REQUIRE(count_estimator(recs, 0.05, kind, 1.0) <= count_estimator(recs, 0.05, kind, 2.0));
    }
    for (double h : {0.01, 0.05, 0.2}) {
        const std::size_t corridor = count_estimator(recs, h, EstimatorKind::Corridor, 2.0);
        const std::size_t jumpsize =
            count_estimator(recs, 2.0 * h * (1.0 - 1e-9), EstimatorKind::JumpSize, 2.0);
        REQUIRE(corridor <= jumpsize);
    }
}

TEST_CASE("rescaled estimate arithmetic", "[estimators]") {
    REQUIRE(rescaled_estimate(0, 0.1, 0.5, 1.0, 0.4) == 0.0);
    const double v = rescaled_estimate(100, 0.01, 0.5, 1.0, 0.398942);
    REQUIRE(v == Catch::Approx(0.1 * 100.0 / 0.398942).epsilon(1e-13));
    REQUIRE(v == Catch::Approx(25.066).epsilon(1e-4));
    REQUIRE(rescaled_estimate(100, 0.01, 0.5, 1.0, 2.0 * 0.398942) == Catch::Approx(0.5 * v));
    REQUIRE_THROWS_AS(rescaled_estimate(1, 0.1, 0.5, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sweep against the occupation baseline", "[estimators]") {
    const auto sim = simulate_path({0.5, 1.0}, 1.0, 0.005, 1e-3, SmallJumpMode::DriftOnly,
                                   RngStream(31, 0));
    std::vector<double> levels;
    for (double y = -0.6; y <= 0.6 + 1e-12; y += 0.1) levels.push_back(y);
    const std::vector<double> times = {0.0, 0.5, 1.0};
    const auto base = occupation_local_time(sim, levels, 0.02, times);

    // a kernel with identically-zero marks makes the estimator vanish,
    // so the sweep error is the sup of the baseline itself
    std::vector<MarkPath> zero_marks;
    for (const auto& j : sim.jumps) {
        MarkPath m;
        m.x = j.dx;
        m.q = 1.0;
        m.unit_samples = {0.0, 0.0, 0.0};
        zero_marks.push_back(m);
    }
    const std::vector<double> hs = {0.2, 0.1, 0.05};
    const auto sweep = theorem1_sweep(sim, zero_marks, 0.4, 1.0, hs, base);
    double sup_ell = 0.0;
    for (const auto& row : base.ell) {
        for (double v : row) sup_ell = std::max(sup_ell, v);
    }
    REQUIRE(sweep.sup_error[0] == Catch::Approx(sup_ell).epsilon(1e-12));
    REQUIRE(sweep.sup_error[1] == Catch::Approx(sup_ell).epsilon(1e-12));

    REQUIRE_THROWS_AS(theorem1_sweep(sim, zero_marks, 0.4, 1.0, {0.1, 0.1}, base),
                      std::invalid_argument);

    // hat marks: the sweep runs and reports decreasing h
    RngStream ms(32, 0);
    std::vector<MarkPath> marks;
    for (const auto& j : sim.jumps) {
        marks.push_back(scale_mark(sample_unit_path(MarkKernel::hat(9), ms), j.dx));
    }
    const auto sweep2 = theorem1_sweep(sim, marks, 0.3989422804014327, 1.0, hs, base);
    REQUIRE(sweep2.sup_error.size() == hs.size());
    for (double e : sweep2.sup_error) REQUIRE(e >= 0.0);
}

TEST_CASE("rates per unit local time", "[estimators]") {
    const auto sim = simulate_path({0.5, 1.0}, 2.0, 0.005, 1e-3, SmallJumpMode::DriftOnly,
                                   RngStream(37, 0));
    const auto recs = collect_crossings(sim, 0.1);
    const auto field = occupation_local_time(sim, {0.1}, 0.02, {sim.T});
    const auto rates = rate_per_local_time(recs, field, 0.1, {0.1, 0.05}, EstimatorKind::JumpSize);
    REQUIRE(rates.size() == 2);
    REQUIRE(rates[1] >= rates[0]);

    LocalTimeField empty;
    empty.level_grid = {5.0};
    empty.time_grid = {1.0};
    empty.bandwidth = 0.02;
    empty.ell = {{0.0}};
    REQUIRE_THROWS_AS(rate_per_local_time(recs, empty, 5.0, {0.1}, EstimatorKind::JumpSize),
                      std::runtime_error);
}

TEST_CASE("least-squares slope fit", "[estimators]") {
    const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(2.5 * x - 1.0);
    const auto fit = slope_fit(xs, ys);
    REQUIRE(fit.slope == Catch::Approx(2.5).epsilon(1e-13));
    REQUIRE(fit.intercept == Catch::Approx(-1.0).margin(1e-12));
    REQUIRE(fit.stderr_slope == Catch::Approx(0.0).margin(1e-12));

    REQUIRE_THROWS_AS(slope_fit({1.0, 1.0, 2.0}, {0.0, 1.0, 2.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(slope_fit({1.0, 2.0}, {0.0, 1.0}), std::invalid_argument);

    RngStream s(41, 0);
    std::vector<double> xn, yn;
    for (int i = 0; i < 50; ++i) {
        xn.push_back(0.1 * i);
        yn.push_back(1.7 * xn.back() + 0.3 + 0.05 * s.normal());
    }
    const auto noisy = slope_fit(xn, yn);
    REQUIRE(std::fabs(noisy.slope - 1.7) < 3.0 * noisy.stderr_slope);
}

TEST_CASE("one-sample KS against the uniform law", "[estimators]") {
    const auto single = ks_uniform({0.5});
    REQUIRE(single.d == Catch::Approx(0.5).epsilon(1e-14));

    const std::size_t n = 100;
    std::vector<double> quantiles;
    for (std::size_t i = 1; i <= n; ++i) quantiles.push_back((static_cast<double>(i) - 0.5) / n);
    REQUIRE(ks_uniform(quantiles).d == Catch::Approx(0.5 / n).epsilon(1e-12));

    REQUIRE_THROWS_AS(ks_uniform({}), std::invalid_argument);
    REQUIRE_THROWS_AS(ks_uniform({0.5, 1.0}), std::invalid_argument);

    // calibration: true uniforms pass at level 0.01 in at least 98 of 100 seeded runs
    int pass = 0;
    for (int rep = 0; rep < 100; ++rep) {
        RngStream s(9000 + rep, 0);
        std::vector<double> u(10000);
        for (auto& v : u) v = s.uniform01();
        if (ks_uniform(u).p > 0.01) ++pass;
    }
    REQUIRE(pass >= 98);
}

TEST_CASE("increment moments vanish at zero separation", "[estimators]") {
    const std::vector<std::pair<double, double>> pairs = {{0.1, 0.1}, {-0.05, 0.05}, {-0.1, 0.1}};
    const auto res = increment_scaling({0.5, 1.0}, pairs, 2.0, 0.5, 50, 0.01, 1e-3, 0.05, 99, 2);
    REQUIRE(res.moments[0] == 0.0);
    REQUIRE(res.moments[1] > 0.0);
    REQUIRE(std::isnan(res.exponent));
}
