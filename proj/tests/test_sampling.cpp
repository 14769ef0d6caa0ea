#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <sstream>

#include "spsc/sampling.hpp"
#include "support/synthetic_pools.hpp"

using namespace spsc;

namespace {

const Block kKey = block_from_hex("000102030405060708090a0b0c0d0e0f");

SamplingPlan small_plan(std::size_t pool) {
    SamplingPlan p;
    p.pool_size = pool;
    p.coarse_trials = 8;
    p.thorough_trials = 16;
    p.coarse_steps = 6;
    p.grid_start = 8;
    p.refine_points = 4;
    p.seed = 3;
    return p;
}

}  // namespace

TEST_CASE("threshold bookkeeping is inclusive") {
    CHECK(meets_threshold(576, 640, 0.90));
    CHECK_FALSE(meets_threshold(575, 640, 0.90));
    CHECK(meets_threshold(640, 640, 0.90));
    CHECK(meets_threshold(58, 64, 0.90));  // 0.90625
    CHECK_FALSE(meets_threshold(57, 64, 0.90));
}

TEST_CASE("plan validation") {
    SamplingPlan p = small_plan(100);
    CHECK_NOTHROW(p.validate());
    p.success_threshold = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = small_plan(100);
    p.coarse_trials = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = small_plan(1);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("grids") {
    SamplingPlan p = small_plan(50000);
    p.grid_start = 1000;
    p.coarse_steps = 20;
    const auto grid = coarse_grid(p);
    CHECK(grid.front() == 1000);
    CHECK(grid.back() == 50000);
    CHECK(grid.size() == 20);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
    // Log spacing: ratios are near-constant.
    const double r0 = static_cast<double>(grid[1]) / static_cast<double>(grid[0]);
    const double r1 = static_cast<double>(grid[11]) / static_cast<double>(grid[10]);
    CHECK(r0 == doctest::Approx(r1).epsilon(0.02));

    p.log_spacing = false;
    const auto lin = coarse_grid(p);
    CHECK(lin.size() == 20);
    CHECK(lin[1] - lin[0] == doctest::Approx(static_cast<double>(lin[11] - lin[10])).epsilon(0.01));

    // Start above the pool collapses to a single point.
    p.grid_start = 1 << 20;
    CHECK(coarse_grid(p) == std::vector<std::size_t>{50000});

    const auto refined = refine_grid(100, 200, 8);
    CHECK(refined.size() == 8);
    CHECK(refined.back() == 200);
    for (std::size_t v : refined) CHECK(v > 100);
}

TEST_CASE("success_rate contracts and determinism") {
    const TraceSet pool = pools::make_hd_oracle_pool(kKey, 96, 5);
    CHECK_THROWS_AS(success_rate(pool, 1, 4, PowerModel::HD, 0), std::invalid_argument);
    CHECK_THROWS_AS(success_rate(pool, 97, 4, PowerModel::HD, 0), std::invalid_argument);

    // Oracle pool: every subsample of size >= 2 succeeds.
    CHECK(success_rate(pool, 16, 16, PowerModel::HD, 1) == 1.0);

    // n = pool size attacks the identical full pool in every trial.
    const double full = success_rate(pool, 96, 8, PowerModel::HD, 2);
    CHECK((full == 0.0 || full == 1.0));
    CHECK(full == 1.0);

    // Identical for 1 and N workers.
    omp_set_num_threads(1);
    const double one = success_rate(pool, 24, 12, PowerModel::HD, 3);
    omp_set_num_threads(4);
    const double four = success_rate(pool, 24, 12, PowerModel::HD, 3);
    omp_set_num_threads(2);
    CHECK(one == four);
}

TEST_CASE("estimator sanity with a mocked Bernoulli attack") {
    // Reported rate stays within 4 binomial standard errors of p in at
    // least 99.9% of simulations.
    const double p = 0.3;
    const int trials = 64;
    const double bound = 4.0 * std::sqrt(p * (1.0 - p) / trials);
    const int sims = 2000;
    int outside = 0;
    for (int s = 0; s < sims; ++s) {
        const int successes = detail::run_trials(
            16, trials, static_cast<std::uint64_t>(s),
            [&](int, Rng& rng) { return rng.real01() < p; });
        const double rate = static_cast<double>(successes) / trials;
        if (std::abs(rate - p) > bound) ++outside;
    }
    CHECK(outside <= sims / 500);  // 0.2% headroom over the 0.1% requirement
}

TEST_CASE("oracle pool discloses at the smallest refined count") {
    const TraceSet pool = pools::make_hd_oracle_pool(kKey, 512, 7);
    SamplingPlan plan = small_plan(512);
    // Keep every grid point above the tiny-n regime where wrong keys can
    // tie |pcc| = 1 on an oracle pool by chance.
    plan.grid_start = 32;
    const NttdEstimate est = estimate_nttd(pool, plan, PowerModel::HD);
    REQUIRE(est.disclosed());
    // The first coarse point passes, so the bracket is (2, 32] and the
    // refined scan settles on its smallest count.
    const auto refined = refine_grid(2, coarse_grid(plan).front(), plan.refine_points);
    CHECK(*est.nttd == refined.front());
    CHECK(est.curve.front().phase == SamplePhase::Coarse);
}

TEST_CASE("flat-noise pool never discloses") {
    TraceSet pool = pools::make_hd_oracle_pool(kKey, 256, 9);
    std::fill(pool.power.begin(), pool.power.end(), 1.0);
    const NttdEstimate est = estimate_nttd(pool, small_plan(256), PowerModel::HD);
    CHECK_FALSE(est.disclosed());
    // Every coarse point was evaluated and failed.
    CHECK(est.curve.size() == coarse_grid(small_plan(256)).size());
    for (const auto& sp : est.curve) CHECK(sp.rate == 0.0);
}

TEST_CASE("two-phase equals the exhaustive thorough scan") {
    // Noisy pools with a nontrivial crossing: oracle power plus noise.
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        TraceSet pool = pools::make_hd_oracle_pool(kKey, 600, seed);
        Rng noise(seed * 17);
        for (auto& p : pool.power) p += noise.normal(6.0);

        SamplingPlan plan = small_plan(600);
        plan.seed = seed;
        const NttdEstimate est = estimate_nttd(pool, plan, PowerModel::HD);

        // Independent control logic: evaluate the full coarse grid, then
        // every refined point of every bracket in order.
        std::optional<std::size_t> expect;
        const auto grid = coarse_grid(plan);
        std::size_t lo = 2;
        for (std::size_t gi = 0; gi < grid.size() && !expect; ++gi) {
            const double rate =
                success_rate(pool, grid[gi], plan.coarse_trials, PowerModel::HD, plan.seed);
            if (rate >= plan.success_threshold) {
                for (std::size_t r : refine_grid(lo, grid[gi], plan.refine_points)) {
                    const double rr =
                        success_rate(pool, r, plan.thorough_trials, PowerModel::HD, plan.seed);
                    if (rr >= plan.success_threshold) {
                        expect = r;
                        break;
                    }
                }
            }
            lo = grid[gi];
        }
        CHECK(est.nttd == expect);
    }
}

TEST_CASE("estimate determinism across worker counts") {
    TraceSet pool = pools::make_hd_oracle_pool(kKey, 400, 21);
    Rng noise(5);
    for (auto& p : pool.power) p += noise.normal(4.0);
    SamplingPlan plan = small_plan(400);

    omp_set_num_threads(1);
    const NttdEstimate a = estimate_nttd(pool, plan, PowerModel::HD);
    omp_set_num_threads(4);
    const NttdEstimate b = estimate_nttd(pool, plan, PowerModel::HD);
    omp_set_num_threads(2);
    CHECK(a.nttd == b.nttd);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
        CHECK(a.curve[i].n == b.curve[i].n);
        CHECK(a.curve[i].successes == b.curve[i].successes);
    }
}

TEST_CASE("model comparison") {
    SamplingPlan plan = small_plan(512);

    SUBCASE("HD oracle pool: HD wins") {
        const TraceSet pool = pools::make_hd_oracle_pool(kKey, 512, 31);
        const ModelComparison cmp = compare_models(pool, plan);
        REQUIRE(cmp.winner.has_value());
        CHECK(*cmp.winner == PowerModel::HD);
        CHECK(cmp.hd.disclosed());
    }
    SUBCASE("HW-shaped pool: HW wins or ties") {
        const TraceSet pool = pools::make_hw_oracle_pool(kKey, 512, 32);
        const ModelComparison cmp = compare_models(pool, plan);
        REQUIRE(cmp.hw.disclosed());
        const bool hw_wins = cmp.winner && *cmp.winner == PowerModel::HW;
        const bool tie = !cmp.winner.has_value() ||
                         (cmp.hd.disclosed() && *cmp.hd.nttd == *cmp.hw.nttd);
        CHECK((hw_wins || tie));
    }
    SUBCASE("flat pool: no winner") {
        TraceSet pool = pools::make_hd_oracle_pool(kKey, 128, 33);
        std::fill(pool.power.begin(), pool.power.end(), 0.0);
        const ModelComparison cmp = compare_models(pool, small_plan(128));
        CHECK_FALSE(cmp.winner.has_value());
        CHECK_FALSE(cmp.hw.disclosed());
        CHECK_FALSE(cmp.hd.disclosed());
    }
}

TEST_CASE("monotonicity diagnostic flags big dips without reordering") {
    std::vector<SuccessPoint> curve;
    curve.push_back({100, 64, 60, 60.0 / 64, SamplePhase::Coarse});
    curve.push_back({200, 64, 20, 20.0 / 64, SamplePhase::Coarse});  // huge dip
    curve.push_back({400, 64, 62, 62.0 / 64, SamplePhase::Coarse});
    const auto warnings = detail::monotonicity_warnings(curve);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0] == 200);

    // Small, in-noise dips stay silent.
    std::vector<SuccessPoint> mild;
    mild.push_back({100, 64, 40, 40.0 / 64, SamplePhase::Coarse});
    mild.push_back({200, 64, 38, 38.0 / 64, SamplePhase::Coarse});
    CHECK(detail::monotonicity_warnings(mild).empty());
}

TEST_CASE("curve CSV and estimate JSON") {
    const TraceSet pool = pools::make_hd_oracle_pool(kKey, 200, 41);
    const NttdEstimate est = estimate_nttd(pool, small_plan(200), PowerModel::HD);

    std::ostringstream csv;
    write_curve_csv(est, csv);
    CHECK(csv.str().starts_with("n,trials,successes,rate,phase\n"));
    CHECK(csv.str().find("coarse") != std::string::npos);
    CHECK(csv.str().find("thorough") != std::string::npos);

    const std::string json = estimate_to_json(est, "oracle", 128.0, 1.0);
    CHECK(json.find("\"label\": \"oracle\"") != std::string::npos);
    CHECK(json.find("\"nttd\"") != std::string::npos);
    CHECK(json.find("\"curve\"") != std::string::npos);
}
