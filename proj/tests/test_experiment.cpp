#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "spsc/experiment.hpp"
#include "spsc/textio.hpp"

using namespace spsc;

namespace {

namespace fs = std::filesystem;

ExperimentConfig tiny_config(const fs::path& out_dir, std::uint64_t master_seed = 5) {
    ExperimentConfig cfg;
    cfg.datasets = 2;
    cfg.pool_size = 600;
    cfg.plan.coarse_trials = 4;
    cfg.plan.thorough_trials = 8;
    cfg.plan.coarse_steps = 4;
    cfg.plan.grid_start = 50;
    cfg.plan.refine_points = 4;
    cfg.master_seed = master_seed;
    cfg.out_dir = out_dir;
    return cfg;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "spsclab_exp_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("grid cell layouts follow the result tables") {
    const auto lvt_only = grid_cells(Study::GridLvtOnly);
    CHECK(lvt_only.size() == 10);  // strict lower triangle, no (0,0), no diagonal
    for (const auto& [a, b] : lvt_only) CHECK(a > b);

    const auto strength = grid_cells(Study::GridLvtStrength);
    CHECK(strength.size() == 25);  // every cell is meaningful
    CHECK(std::find(strength.begin(), strength.end(), std::make_pair(0, 0)) != strength.end());
    CHECK(std::find(strength.begin(), strength.end(), std::make_pair(4, 4)) != strength.end());
}

TEST_CASE("grid design specs encode the two study recipes") {
    const DesignSpec lvt = grid_design_spec(Study::GridLvtOnly, 6, 2, 0.0, 9);
    CHECK(lvt.half_a.primitive_paths == 1);
    CHECK(lvt.half_b.primitive_paths == 1);
    CHECK(lvt.half_a.policy == StrengthPolicy::ConstantRandom);
    CHECK(lvt.half_b.policy == StrengthPolicy::ConstantRandom);
    CHECK(lvt.shared_constant_strength);

    const DesignSpec str = grid_design_spec(Study::GridLvtStrength, 0, 8, 0.0, 9);
    CHECK(str.half_a.primitive_paths == 1);
    CHECK(str.half_b.primitive_paths == 2);
    CHECK(str.half_a.policy == StrengthPolicy::ConstantRandom);
    CHECK(str.half_b.policy == StrengthPolicy::PerFFRandom);
    CHECK_FALSE(str.shared_constant_strength);
}

TEST_CASE("censored cells are counted, never averaged") {
    NttdEstimate disclosed_a, disclosed_b, censored;
    disclosed_a.nttd = 1000;
    disclosed_b.nttd = 3000;

    std::vector<GridCell> cells;
    cells.push_back({0, 8, 0, 1, 1, disclosed_a, 128.0, 1.0});
    cells.push_back({1, 8, 0, 2, 2, disclosed_b, 130.0, 1.1});
    cells.push_back({2, 8, 0, 3, 3, censored, 132.0, 1.2});

    const auto avg = average_grid(cells);
    REQUIRE(avg.size() == 1);
    CHECK(avg[0].mean_nttd == doctest::Approx(2000.0));
    CHECK(avg[0].disclosed_count == 2);
    CHECK(avg[0].censored_count == 1);
    CHECK(avg[0].mean_area == doctest::Approx(130.0));

    // All censored: no mean at all.
    std::vector<GridCell> dark = {{0, 2, 0, 1, 1, censored, 1, 1}};
    const auto davg = average_grid(dark);
    CHECK_FALSE(davg[0].mean_nttd.has_value());
    CHECK(davg[0].censored_count == 1);
}

TEST_CASE("summary table formatting") {
    SummaryEntry baseline{"baseline", 128.0, 500, 50000};

    SUBCASE("baseline alone") {
        const auto rows = build_summary(baseline, {});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].overhead == "1");
        CHECK(rows[0].resilience_ratio == "1");
        CHECK(rows[0].nttd == "500");
    }
    SUBCASE("96x countermeasure renders the ratio") {
        SummaryEntry cm{"cm", 135.0, 48000, 50000};
        const auto rows = build_summary(baseline, {cm});
        REQUIRE(rows.size() == 2);
        CHECK(rows[1].resilience_ratio == "96");
        CHECK(rows[1].label == "cm");
    }
    SUBCASE("censored entries render pool-bound sentinels") {
        SummaryEntry cm{"cm", 160.0, std::nullopt, 50000};
        const auto rows = build_summary(baseline, {cm});
        CHECK(rows[1].nttd == ">50000");
        CHECK(rows[1].resilience_ratio == ">100");
        CHECK(rows[1].nttd_per_area == ">312.5");
        const std::string csv = summary_csv(rows);
        CHECK(csv.starts_with("label,area,overhead,nttd,nttd_per_area,resilience_ratio\n"));
        CHECK(csv.find(">50000") != std::string::npos);
        const std::string text = summary_text(rows);
        CHECK(text.find("ratio") != std::string::npos);
    }
}

TEST_CASE("experiment config JSON") {
    const std::string json = R"({
        "study": "grid-lvt-strength",
        "datasets": 4,
        "pool_size": 12345,
        "master_seed": 99,
        "key": "000102030405060708090a0b0c0d0e0f",
        "model": "hw",
        "plan": {"coarse_trials": 5, "thorough_trials": 7, "grid_start": 64},
        "sim": {"noise_sigma": 1.5},
        "out_dir": "/tmp/x"
    })";
    const ExperimentConfig cfg = experiment_config_from_json(json);
    CHECK(cfg.study == Study::GridLvtStrength);
    CHECK(cfg.datasets == 4);
    CHECK(cfg.pool_size == 12345);
    CHECK(cfg.master_seed == 99);
    CHECK_FALSE(cfg.random_key);
    CHECK(cfg.key == block_from_hex("000102030405060708090a0b0c0d0e0f"));
    CHECK(cfg.model == PowerModel::HW);
    CHECK(cfg.plan.coarse_trials == 5);
    CHECK(cfg.plan.thorough_trials == 7);
    CHECK(cfg.sim.noise_sigma == 1.5);
    CHECK(cfg.out_dir == fs::path("/tmp/x"));

    CHECK_THROWS(experiment_config_from_json(R"({"study": "bogus"})"));
}

TEST_CASE("baseline sweep emits complete, reproducible files") {
    const auto dir_a = fresh_dir("sweep_a");
    const auto dir_b = fresh_dir("sweep_b");

    ExperimentConfig cfg = tiny_config(dir_a);
    const BaselineSweepResult res = run_baseline_sweep(cfg);
    CHECK(res.points.size() == 9 * 2);  // lvt 0..8 x datasets

    const auto means = res.means();
    CHECK(means.size() == 9);
    for (const auto& mp : means) CHECK(mp.disclosed_count + mp.censored_count == 2);

    for (const char* f : {"baseline_sweep.csv", "baseline_sweep_mean.csv", "baseline_sweep.gp"})
        CHECK(fs::exists(dir_a / f));

    // Same master seed -> byte-identical CSVs.
    cfg.out_dir = dir_b;
    run_baseline_sweep(cfg);
    CHECK(read_file(dir_a / "baseline_sweep.csv") == read_file(dir_b / "baseline_sweep.csv"));
    CHECK(read_file(dir_a / "baseline_sweep_mean.csv") ==
          read_file(dir_b / "baseline_sweep_mean.csv"));

    // Different master seed -> different data.
    const auto dir_c = fresh_dir("sweep_c");
    ExperimentConfig other = tiny_config(dir_c, 6);
    run_baseline_sweep(other);
    CHECK(read_file(dir_a / "baseline_sweep.csv") != read_file(dir_c / "baseline_sweep.csv"));
}

TEST_CASE("worker count does not change study outputs") {
    const auto dir_a = fresh_dir("threads_1");
    const auto dir_b = fresh_dir("threads_4");

    ExperimentConfig cfg = tiny_config(dir_a);
    cfg.datasets = 1;
    cfg.threads = 1;
    run_baseline_sweep(cfg);

    cfg.out_dir = dir_b;
    cfg.threads = 4;
    run_baseline_sweep(cfg);

    CHECK(read_file(dir_a / "baseline_sweep.csv") == read_file(dir_b / "baseline_sweep.csv"));
}

TEST_CASE("grid study: smoke run, round trip, reproducible cells") {
    const auto dir = fresh_dir("grid");
    ExperimentConfig cfg = tiny_config(dir);
    cfg.datasets = 1;
    cfg.pool_size = 500;

    const GridResult grid = run_grid(cfg, Study::GridLvtOnly);
    CHECK(grid.cells.size() == 10);
    CHECK(grid.average.size() == 10);
    CHECK(fs::exists(dir / "grid_lvt_only.csv"));
    CHECK(fs::exists(dir / "grid_lvt_only_mean.csv"));
    CHECK(fs::exists(dir / "grid_lvt_only.json"));

    // JSON round trip.
    const GridResult back = grid_from_json(grid_to_json(grid));
    CHECK(back.cells.size() == grid.cells.size());
    CHECK(back.mode == grid.mode);
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        CHECK(back.cells[i].est.nttd == grid.cells[i].est.nttd);
        CHECK(back.cells[i].design_seed == grid.cells[i].design_seed);
        CHECK(back.cells[i].area == grid.cells[i].area);
    }

    // Every cell is reproducible in isolation from its recorded seeds.
    const GridCell& cell = grid.cells[3];
    const DesignSpec spec = grid_design_spec(Study::GridLvtOnly, cell.half_a, cell.half_b,
                                             cfg.grid_lvt_mix, cell.design_seed);
    const StateRegisterConfig design = generate_design(spec);
    SimOptions sim = cfg.sim;
    sim.seed = cell.pool_seed;
    const TraceSet pool =
        generate_traces(design, cfg.table, cfg.effective_key(), cfg.pool_size, sim);
    SamplingPlan plan = cfg.plan;
    plan.pool_size = cfg.pool_size;
    plan.seed = plan_seed_for(cell.design_seed);
    const NttdEstimate redo = estimate_nttd(pool, plan, cfg.model);
    CHECK(redo.nttd == cell.est.nttd);
}

TEST_CASE("custom study runs a design file") {
    const auto dir = fresh_dir("custom");
    const StateRegisterConfig design = generate_baseline(8, 3);
    const fs::path design_path = dir / "design.txt";
    atomic_write(design_path, to_text(design));

    ExperimentConfig cfg = tiny_config(dir);
    cfg.study = Study::Custom;
    cfg.datasets = 2;
    cfg.pool_size = 400;
    cfg.design_file = design_path;
    const CustomResult res = run_custom(cfg);
    CHECK(res.cells.size() == 2);
    CHECK(fs::exists(dir / "custom_nttd.csv"));
    for (const auto& c : res.cells) CHECK(c.area == doctest::Approx(128.0));
}

TEST_CASE("study names round-trip through config parsing") {
    for (Study s : {Study::BaselineSweep, Study::GridLvtOnly, Study::GridLvtStrength}) {
        const std::string json = std::string("{\"study\": \"") + std::string(study_name(s)) +
                                 "\", \"out_dir\": \"/tmp/y\"}";
        CHECK(experiment_config_from_json(json).study == s);
    }
}
