#include "spsc/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spsc/textio.hpp"

namespace spsc {

namespace {

constexpr int kLvtSweepMax = 8;

std::string opt_nttd(const std::optional<std::size_t>& v) {
    return v ? std::to_string(*v) : std::string("NA");
}

std::string opt_mean(const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string("NA");
}

void apply_threads(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
}

SamplingPlan plan_for(const ExperimentConfig& cfg, std::uint64_t design_seed_value) {
    SamplingPlan plan = cfg.plan;
    plan.pool_size = cfg.pool_size;
    plan.seed = plan_seed_for(design_seed_value);
    return plan;
}

TraceSet make_pool(const ExperimentConfig& cfg, const StateRegisterConfig& design,
                   std::uint64_t pool_seed) {
    SimOptions options = cfg.sim;
    options.seed = pool_seed;
    return generate_traces(design, cfg.table, cfg.effective_key(), cfg.pool_size, options);
}

GridCell run_cell(const ExperimentConfig& cfg, const StateRegisterConfig& design, int dataset,
                  int half_a, int half_b, std::uint64_t design_seed_value) {
    GridCell cell;
    cell.dataset = dataset;
    cell.half_a = half_a;
    cell.half_b = half_b;
    cell.design_seed = design_seed_value;
    cell.pool_seed = pool_seed_for(design_seed_value);

    const TraceSet pool = make_pool(cfg, design, cell.pool_seed);
    cell.est = estimate_nttd(pool, plan_for(cfg, design_seed_value), cfg.model);

    const auto reference = StateRegisterConfig::uniform(CellType::HVT, DriveStrength::X2);
    const AreaReport area = area_report(design, reference, cfg.table);
    cell.area = area.absolute;
    cell.overhead = area.overhead;
    return cell;
}

std::string grid_csv(const GridResult& grid) {
    std::ostringstream out;
    out << "dataset,half_a,half_b,design_seed,pool_seed,nttd,disclosed,area,overhead\n";
    for (const auto& c : grid.cells)
        out << c.dataset << "," << c.half_a << "," << c.half_b << "," << c.design_seed << ","
            << c.pool_seed << "," << opt_nttd(c.est.nttd) << ","
            << (c.est.disclosed() ? "true" : "false") << "," << fmt_double(c.area) << ","
            << fmt_double(c.overhead) << "\n";
    return out.str();
}

std::string grid_mean_csv(const GridResult& grid) {
    std::ostringstream out;
    out << "half_a,half_b,mean_nttd,disclosed_count,censored_count,mean_area,mean_overhead\n";
    for (const auto& c : grid.average)
        out << c.half_a << "," << c.half_b << "," << opt_mean(c.mean_nttd) << ","
            << c.disclosed_count << "," << c.censored_count << "," << fmt_double(c.mean_area)
            << "," << fmt_double(c.mean_overhead) << "\n";
    return out.str();
}

nlohmann::ordered_json estimate_json_obj(const NttdEstimate& est) {
    return nlohmann::ordered_json::parse(estimate_to_json(est, ""));
}

NttdEstimate estimate_from_json_obj(const nlohmann::json& j) {
    NttdEstimate est;
    if (!j["nttd"].is_null()) est.nttd = j["nttd"].get<std::size_t>();
    est.model = model_from_name(j.value("model", "hd"));
    const auto& p = j["plan"];
    est.plan.pool_size = j["pool_size"].get<std::size_t>();
    est.plan.coarse_trials = p["coarse_trials"].get<int>();
    est.plan.thorough_trials = p["thorough_trials"].get<int>();
    est.plan.success_threshold = p["success_threshold"].get<double>();
    est.plan.coarse_steps = p["coarse_steps"].get<int>();
    est.plan.grid_start = p["grid_start"].get<std::size_t>();
    est.plan.log_spacing = p["log_spacing"].get<bool>();
    est.plan.refine_points = p["refine_points"].get<int>();
    est.plan.seed = p["seed"].get<std::uint64_t>();
    for (const auto& c : j["curve"]) {
        SuccessPoint sp;
        sp.n = c["n"].get<std::size_t>();
        sp.trials = c["trials"].get<int>();
        sp.successes = c["successes"].get<int>();
        sp.rate = c["rate"].get<double>();
        sp.phase = c["phase"] == "coarse" ? SamplePhase::Coarse : SamplePhase::Thorough;
        est.curve.push_back(sp);
    }
    if (j.contains("monotonicity_warnings"))
        est.monotonicity_warnings = j["monotonicity_warnings"].get<std::vector<std::size_t>>();
    return est;
}

}  // namespace

std::string_view study_name(Study s) {
    switch (s) {
        case Study::BaselineSweep: return "baseline-sweep";
        case Study::GridLvtOnly: return "grid-lvt-only";
        case Study::GridLvtStrength: return "grid-lvt-strength";
        case Study::Custom: return "custom";
    }
    throw std::logic_error("study_name: bad enum");
}

void ExperimentConfig::validate() const {
    if (datasets < 1) throw std::invalid_argument("experiment: datasets must be >= 1");
    if (pool_size < 2) throw std::invalid_argument("experiment: pool_size must be >= 2");
    sim.validate();
    if (study == Study::Custom && design_file.empty())
        throw std::invalid_argument("experiment: custom study needs a design file");
}

Block ExperimentConfig::effective_key() const {
    if (!random_key) return key;
    Rng rng(derive_seed(master_seed, kStreamKey));
    Block k;
    for (auto& b : k.bytes) b = rng.next_byte();
    return k;
}

std::uint64_t dataset_seed(std::uint64_t master_seed, int dataset) {
    return derive_seed(master_seed, kStreamDataset, static_cast<std::uint64_t>(dataset));
}

std::uint64_t design_seed_for(std::uint64_t dataset_seed_value, int half_a, int half_b) {
    return derive_seed(dataset_seed_value, kStreamDesign, static_cast<std::uint64_t>(half_a),
                       static_cast<std::uint64_t>(half_b));
}

std::uint64_t baseline_design_seed(std::uint64_t dataset_seed_value, int lvt_bits) {
    return derive_seed(dataset_seed_value, kStreamDesign, 0x100u + static_cast<std::uint64_t>(lvt_bits));
}

std::uint64_t pool_seed_for(std::uint64_t design_seed_value) {
    return derive_seed(design_seed_value, kStreamPool);
}

std::uint64_t plan_seed_for(std::uint64_t design_seed_value) {
    return derive_seed(design_seed_value, kStreamPlan);
}

ExperimentConfig experiment_config_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    if (j.contains("study")) {
        const std::string s = j["study"].get<std::string>();
        if (s == "baseline-sweep")
            cfg.study = Study::BaselineSweep;
        else if (s == "grid-lvt-only")
            cfg.study = Study::GridLvtOnly;
        else if (s == "grid-lvt-strength")
            cfg.study = Study::GridLvtStrength;
        else if (s == "custom")
            cfg.study = Study::Custom;
        else
            throw std::invalid_argument("unknown study '" + s + "'");
    }
    cfg.datasets = j.value("datasets", cfg.datasets);
    cfg.pool_size = j.value("pool_size", cfg.pool_size);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    if (j.contains("key")) {
        const std::string k = j["key"].get<std::string>();
        if (k.starts_with("random:")) {
            cfg.random_key = true;
            cfg.master_seed = j.value("master_seed", cfg.master_seed);
        } else {
            cfg.random_key = false;
            cfg.key = block_from_hex(k);
        }
    }
    if (j.contains("model")) cfg.model = model_from_name(j["model"].get<std::string>());
    cfg.grid_lvt_mix = j.value("grid_lvt_mix", cfg.grid_lvt_mix);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("design_file")) cfg.design_file = j["design_file"].get<std::string>();
    if (j.contains("plan")) {
        const auto& p = j["plan"];
        cfg.plan.coarse_trials = p.value("coarse_trials", cfg.plan.coarse_trials);
        cfg.plan.thorough_trials = p.value("thorough_trials", cfg.plan.thorough_trials);
        cfg.plan.success_threshold = p.value("success_threshold", cfg.plan.success_threshold);
        cfg.plan.coarse_steps = p.value("coarse_steps", cfg.plan.coarse_steps);
        cfg.plan.grid_start = p.value("grid_start", cfg.plan.grid_start);
        cfg.plan.log_spacing = p.value("log_spacing", cfg.plan.log_spacing);
        cfg.plan.refine_points = p.value("refine_points", cfg.plan.refine_points);
    }
    if (j.contains("sim")) {
        const auto& s = j["sim"];
        cfg.sim.clk_level = s.value("clk_level", cfg.sim.clk_level);
        cfg.sim.noise_sigma = s.value("noise_sigma", cfg.sim.noise_sigma);
        cfg.sim.background_offset = s.value("background_offset", cfg.sim.background_offset);
    }
    return cfg;
}

const NttdEstimate& BaselinePoint::best() const {
    if (hd.disclosed() && hw.disclosed()) return *hd.nttd <= *hw.nttd ? hd : hw;
    if (hd.disclosed()) return hd;
    if (hw.disclosed()) return hw;
    return hd;
}

std::vector<BaselineSweepResult::MeanPoint> BaselineSweepResult::means() const {
    std::vector<MeanPoint> out;
    for (int lvt = 0; lvt <= kLvtSweepMax; ++lvt) {
        MeanPoint mp;
        mp.lvt_bits = lvt;
        double sum = 0.0;
        for (const auto& p : points) {
            if (p.lvt_bits != lvt) continue;
            const NttdEstimate& best = p.best();
            if (best.disclosed()) {
                sum += static_cast<double>(*best.nttd);
                ++mp.disclosed_count;
            } else {
                ++mp.censored_count;
            }
        }
        if (mp.disclosed_count > 0) mp.mean_nttd = sum / mp.disclosed_count;
        if (mp.disclosed_count + mp.censored_count > 0) out.push_back(mp);
    }
    return out;
}

BaselineSweepResult run_baseline_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    apply_threads(cfg);

    BaselineSweepResult result;
    for (int lvt = 0; lvt <= kLvtSweepMax; ++lvt) {
        for (int d = 0; d < cfg.datasets; ++d) {
            BaselinePoint p;
            p.lvt_bits = lvt;
            p.dataset = d;
            const std::uint64_t dseed = dataset_seed(cfg.master_seed, d);
            p.design_seed = baseline_design_seed(dseed, lvt);
            p.pool_seed = pool_seed_for(p.design_seed);

            const StateRegisterConfig design = generate_baseline(lvt, p.design_seed);
            const TraceSet pool = make_pool(cfg, design, p.pool_seed);
            const SamplingPlan plan = plan_for(cfg, p.design_seed);
            p.hd = estimate_nttd(pool, plan, PowerModel::HD);
            p.hw = estimate_nttd(pool, plan, PowerModel::HW);
            result.points.push_back(std::move(p));
        }
    }

    if (!cfg.out_dir.empty()) {
        std::ostringstream rows;
        rows << "lvt_bits_per_byte,dataset,design_seed,pool_seed,nttd_hd,nttd_hw,best_model,"
                "best_nttd\n";
        for (const auto& p : result.points) {
            const bool hd_best = &p.best() == &p.hd;
            rows << p.lvt_bits << "," << p.dataset << "," << p.design_seed << "," << p.pool_seed
                 << "," << opt_nttd(p.hd.nttd) << "," << opt_nttd(p.hw.nttd) << ","
                 << (hd_best ? "hd" : "hw") << "," << opt_nttd(p.best().nttd) << "\n";
        }
        atomic_write(cfg.out_dir / "baseline_sweep.csv", rows.str());

        std::ostringstream mean;
        mean << "lvt_bits_per_byte,mean_nttd,disclosed_count,censored_count\n";
        for (const auto& mp : result.means())
            mean << mp.lvt_bits << "," << opt_mean(mp.mean_nttd) << "," << mp.disclosed_count
                 << "," << mp.censored_count << "\n";
        atomic_write(cfg.out_dir / "baseline_sweep_mean.csv", mean.str());

        std::ostringstream gp;
        gp << "# gnuplot script for the baseline LVT sweep\n"
           << "set datafile separator ','\n"
           << "set xlabel 'LVT bits per byte'\n"
           << "set ylabel 'mean NTTD (90% success)'\n"
           << "set logscale y\n"
           << "set key off\n"
           << "plot 'baseline_sweep_mean.csv' skip 1 using 1:2 with linespoints pt 7\n";
        atomic_write(cfg.out_dir / "baseline_sweep.gp", gp.str());
    }
    return result;
}

std::vector<GridAverageCell> average_grid(const std::vector<GridCell>& cells) {
    std::vector<GridAverageCell> out;
    for (const auto& c : cells) {
        auto it = std::find_if(out.begin(), out.end(), [&](const GridAverageCell& a) {
            return a.half_a == c.half_a && a.half_b == c.half_b;
        });
        if (it == out.end()) {
            out.push_back({c.half_a, c.half_b, std::nullopt, 0, 0, 0.0, 0.0});
            it = out.end() - 1;
        }
        if (c.est.disclosed()) {
            it->mean_nttd = it->mean_nttd.value_or(0.0) + static_cast<double>(*c.est.nttd);
            ++it->disclosed_count;
        } else {
            ++it->censored_count;
        }
        it->mean_area += c.area;
        it->mean_overhead += c.overhead;
    }
    for (auto& a : out) {
        const int total = a.disclosed_count + a.censored_count;
        if (a.mean_nttd) *a.mean_nttd /= a.disclosed_count;
        a.mean_area /= total;
        a.mean_overhead /= total;
    }
    return out;
}

std::vector<std::pair<int, int>> grid_cells(Study mode) {
    std::vector<std::pair<int, int>> cells;
    for (int a = 0; a <= 8; a += 2)
        for (int b = 0; b <= 8; b += 2) {
            if (mode == Study::GridLvtOnly && a <= b) continue;  // Table II layout: '---'
            cells.emplace_back(a, b);
        }
    return cells;
}

DesignSpec grid_design_spec(Study mode, int half_a, int half_b, double lvt_mix,
                            std::uint64_t design_seed_value) {
    DesignSpec spec;
    spec.half_a.primitives_per_byte = half_a;
    spec.half_b.primitives_per_byte = half_b;
    spec.lvt_mix = lvt_mix;
    spec.seed = design_seed_value;
    if (mode == Study::GridLvtOnly) {
        // Single-path primitives, one constant strength across all registers.
        spec.half_a.policy = StrengthPolicy::ConstantRandom;
        spec.half_b.policy = StrengthPolicy::ConstantRandom;
        spec.half_a.primitive_paths = 1;
        spec.half_b.primitive_paths = 1;
        spec.shared_constant_strength = true;
    } else {
        // Half A constant strength with single-path primitives; half B
        // per-FF random strengths with full two-path primitives.
        spec.half_a.policy = StrengthPolicy::ConstantRandom;
        spec.half_a.primitive_paths = 1;
        spec.half_b.policy = StrengthPolicy::PerFFRandom;
        spec.half_b.primitive_paths = 2;
    }
    return spec;
}

GridResult run_grid(const ExperimentConfig& cfg, Study mode) {
    if (mode != Study::GridLvtOnly && mode != Study::GridLvtStrength)
        throw std::invalid_argument("run_grid: mode must be a grid study");
    cfg.validate();
    apply_threads(cfg);

    GridResult grid;
    grid.mode = mode;
    grid.pool_size = cfg.pool_size;
    grid.datasets = cfg.datasets;
    grid.master_seed = cfg.master_seed;

    for (int d = 0; d < cfg.datasets; ++d) {
        const std::uint64_t dseed = dataset_seed(cfg.master_seed, d);
        for (const auto& [a, b] : grid_cells(mode)) {
            const std::uint64_t design_seed_value = design_seed_for(dseed, a, b);
            const DesignSpec spec =
                grid_design_spec(mode, a, b, cfg.grid_lvt_mix, design_seed_value);
            const StateRegisterConfig design = generate_design(spec);
            grid.cells.push_back(run_cell(cfg, design, d, a, b, design_seed_value));
        }
    }
    grid.average = average_grid(grid.cells);

    if (!cfg.out_dir.empty()) {
        const std::string stem =
            mode == Study::GridLvtOnly ? "grid_lvt_only" : "grid_lvt_strength";
        atomic_write(cfg.out_dir / (stem + ".csv"), grid_csv(grid));
        atomic_write(cfg.out_dir / (stem + "_mean.csv"), grid_mean_csv(grid));
        atomic_write(cfg.out_dir / (stem + ".json"), grid_to_json(grid));
    }
    return grid;
}

std::string grid_to_json(const GridResult& grid) {
    nlohmann::ordered_json j;
    j["mode"] = std::string(study_name(grid.mode));
    j["pool_size"] = grid.pool_size;
    j["datasets"] = grid.datasets;
    j["master_seed"] = grid.master_seed;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : grid.cells) {
        nlohmann::ordered_json jc;
        jc["dataset"] = c.dataset;
        jc["half_a"] = c.half_a;
        jc["half_b"] = c.half_b;
        jc["design_seed"] = c.design_seed;
        jc["pool_seed"] = c.pool_seed;
        jc["area"] = c.area;
        jc["overhead"] = c.overhead;
        jc["estimate"] = estimate_json_obj(c.est);
        cells.push_back(jc);
    }
    j["cells"] = cells;
    nlohmann::ordered_json avg = nlohmann::ordered_json::array();
    for (const auto& a : grid.average) {
        nlohmann::ordered_json ja;
        ja["half_a"] = a.half_a;
        ja["half_b"] = a.half_b;
        if (a.mean_nttd)
            ja["mean_nttd"] = *a.mean_nttd;
        else
            ja["mean_nttd"] = nullptr;
        ja["disclosed_count"] = a.disclosed_count;
        ja["censored_count"] = a.censored_count;
        ja["mean_area"] = a.mean_area;
        ja["mean_overhead"] = a.mean_overhead;
        avg.push_back(ja);
    }
    j["average"] = avg;
    return j.dump(2) + "\n";
}

GridResult grid_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    GridResult grid;
    const std::string mode = j["mode"].get<std::string>();
    grid.mode = mode == "grid-lvt-only" ? Study::GridLvtOnly : Study::GridLvtStrength;
    grid.pool_size = j["pool_size"].get<std::size_t>();
    grid.datasets = j["datasets"].get<int>();
    grid.master_seed = j["master_seed"].get<std::uint64_t>();
    for (const auto& jc : j["cells"]) {
        GridCell c;
        c.dataset = jc["dataset"].get<int>();
        c.half_a = jc["half_a"].get<int>();
        c.half_b = jc["half_b"].get<int>();
        c.design_seed = jc["design_seed"].get<std::uint64_t>();
        c.pool_seed = jc["pool_seed"].get<std::uint64_t>();
        c.area = jc["area"].get<double>();
        c.overhead = jc["overhead"].get<double>();
        c.est = estimate_from_json_obj(jc["estimate"]);
        grid.cells.push_back(std::move(c));
    }
    for (const auto& ja : j["average"]) {
        GridAverageCell a;
        a.half_a = ja["half_a"].get<int>();
        a.half_b = ja["half_b"].get<int>();
        if (!ja["mean_nttd"].is_null()) a.mean_nttd = ja["mean_nttd"].get<double>();
        a.disclosed_count = ja["disclosed_count"].get<int>();
        a.censored_count = ja["censored_count"].get<int>();
        a.mean_area = ja["mean_area"].get<double>();
        a.mean_overhead = ja["mean_overhead"].get<double>();
        grid.average.push_back(a);
    }
    return grid;
}

CustomResult run_custom(const ExperimentConfig& cfg) {
    cfg.validate();
    apply_threads(cfg);
    const StateRegisterConfig design = config_from_text(read_file(cfg.design_file));

    CustomResult result;
    for (int d = 0; d < cfg.datasets; ++d) {
        const std::uint64_t dseed = dataset_seed(cfg.master_seed, d);
        const std::uint64_t design_seed_value = design_seed_for(dseed, -1, -1);
        result.cells.push_back(run_cell(cfg, design, d, 0, 0, design_seed_value));
    }

    if (!cfg.out_dir.empty()) {
        std::ostringstream rows;
        rows << "dataset,pool_seed,nttd,disclosed,area,overhead\n";
        for (const auto& c : result.cells)
            rows << c.dataset << "," << c.pool_seed << "," << opt_nttd(c.est.nttd) << ","
                 << (c.est.disclosed() ? "true" : "false") << "," << fmt_double(c.area) << ","
                 << fmt_double(c.overhead) << "\n";
        atomic_write(cfg.out_dir / "custom_nttd.csv", rows.str());
    }
    return result;
}

std::vector<SummaryRow> build_summary(const SummaryEntry& baseline,
                                      const std::vector<SummaryEntry>& entries) {
    std::vector<SummaryRow> rows;
    auto render = [&](const SummaryEntry& e) {
        SummaryRow r;
        r.label = e.label;
        r.area = fmt_double(e.area);
        r.overhead = fmt_double(e.area / baseline.area);
        if (e.nttd) {
            r.nttd = std::to_string(*e.nttd);
            r.nttd_per_area = fmt_double(static_cast<double>(*e.nttd) / e.area);
        } else {
            r.nttd = ">" + std::to_string(e.pool_size);
            r.nttd_per_area = ">" + fmt_double(static_cast<double>(e.pool_size) / e.area);
        }
        if (baseline.nttd) {
            const double base = static_cast<double>(*baseline.nttd);
            if (e.nttd)
                r.resilience_ratio = fmt_double(static_cast<double>(*e.nttd) / base);
            else
                r.resilience_ratio = ">" + fmt_double(static_cast<double>(e.pool_size) / base);
        } else {
            r.resilience_ratio = "NA";
        }
        return r;
    };
    rows.push_back(render(baseline));
    for (const auto& e : entries) rows.push_back(render(e));
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << "label,area,overhead,nttd,nttd_per_area,resilience_ratio\n";
    for (const auto& r : rows)
        out << r.label << "," << r.area << "," << r.overhead << "," << r.nttd << ","
            << r.nttd_per_area << "," << r.resilience_ratio << "\n";
    return out.str();
}

std::string summary_text(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    auto pad = [](const std::string& s, std::size_t w) {
        return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
    };
    std::size_t label_w = 6;
    for (const auto& r : rows) label_w = std::max(label_w, r.label.size());
    out << pad("design", label_w) << "  " << pad("area", 10) << pad("overhead", 10)
        << pad("nttd", 10) << pad("nttd/area", 12) << "ratio\n";
    for (const auto& r : rows)
        out << pad(r.label, label_w) << "  " << pad(r.area, 10) << pad(r.overhead, 10)
            << pad(r.nttd, 10) << pad(r.nttd_per_area, 12) << r.resilience_ratio << "\n";
    return out.str();
}

}  // namespace spsc
