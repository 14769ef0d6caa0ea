// spsclab: desk-scale static-power side-channel laboratory for an AES-128
// core. Simulates data-dependent leakage of the 128 state-register
// flip-flops under configurable Vt/drive-strength assignments (including the
// randomized dual-path register primitive), attacks the traces with
// sampling-based last-round CPA, and reports resilience as NTTD.

#include <omp.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spsc/experiment.hpp"
#include "spsc/textio.hpp"

namespace {

using namespace spsc;

struct PlanFlags {
    int coarse_trials = 16;
    int thorough_trials = 64;
    double threshold = 0.90;
    int coarse_steps = 20;
    std::size_t grid_start = 1000;
    bool linear = false;
    int refine_points = 8;
    std::uint64_t seed = 0;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--coarse-trials", coarse_trials, "Trials per coarse grid point");
        cmd.add_option("--thorough-trials", thorough_trials, "Trials per refined grid point");
        cmd.add_option("--threshold", threshold, "Success-rate threshold (inclusive)");
        cmd.add_option("--coarse-steps", coarse_steps, "Number of coarse grid points");
        cmd.add_option("--grid-start", grid_start, "Smallest coarse trace count");
        cmd.add_flag("--linear", linear, "Linearly spaced coarse grid (default: log)");
        cmd.add_option("--refine-points", refine_points, "Refined counts per bracket");
        cmd.add_option("--plan-seed", seed, "Sampling seed");
    }
    SamplingPlan plan(std::size_t pool) const {
        SamplingPlan p;
        p.pool_size = pool;
        p.coarse_trials = coarse_trials;
        p.thorough_trials = thorough_trials;
        p.success_threshold = threshold;
        p.coarse_steps = coarse_steps;
        p.grid_start = grid_start;
        p.log_spacing = !linear;
        p.refine_points = refine_points;
        p.seed = seed;
        return p;
    }
};

LeakageTable table_from(const std::string& path) {
    if (path.empty()) return default_table();
    return load_table(read_file(path));
}

Block key_from(const std::string& spec) {
    if (spec.starts_with("random:")) {
        const auto seed = parse_u64(spec.substr(7));
        if (!seed) throw std::invalid_argument("bad key spec '" + spec + "'");
        Rng rng(derive_seed(*seed, kStreamKey));
        Block k;
        for (auto& b : k.bytes) b = rng.next_byte();
        return k;
    }
    return block_from_hex(spec);
}

void write_text(const std::string& path, const std::string& content) {
    atomic_write(std::filesystem::path(path), content);
}

int cmd_gen_design(int baseline_lvt, bool grid_mode, int half_a, int half_b,
                   const std::string& policy_a, const std::string& policy_b, int paths_a,
                   int paths_b, double lvt_mix, bool shared_constant, std::uint64_t seed,
                   const std::string& out, const std::string& lib) {
    StateRegisterConfig cfg;
    if (baseline_lvt >= 0) {
        cfg = generate_baseline(baseline_lvt, seed);
    } else if (grid_mode) {
        auto policy = [](const std::string& s) {
            if (s == "constant") return StrengthPolicy::ConstantRandom;
            if (s == "per-ff") return StrengthPolicy::PerFFRandom;
            throw std::invalid_argument("policy must be 'constant' or 'per-ff'");
        };
        DesignSpec spec;
        spec.half_a = {half_a, policy(policy_a), paths_a};
        spec.half_b = {half_b, policy(policy_b), paths_b};
        spec.lvt_mix = lvt_mix;
        spec.shared_constant_strength = shared_constant;
        spec.seed = seed;
        cfg = generate_design(spec);
    } else {
        throw std::invalid_argument("pass either --baseline-lvt or --half-a/--half-b");
    }
    write_text(out, to_text(cfg));

    const LeakageTable table = table_from(lib);
    const auto reference = StateRegisterConfig::uniform(CellType::HVT, DriveStrength::X2);
    const AreaReport area = area_report(cfg, reference, table);
    std::cout << "design: " << cfg.label << "\n"
              << "area: " << fmt_double(area.absolute) << " ("
              << fmt_double(area.overhead) << "x vs all-plain X2)\n"
              << "written: " << out << "\n";
    return 0;
}

int cmd_simulate(const std::string& design_path, const std::string& key_spec, std::size_t n,
                 std::uint64_t seed, double sigma, double offset, int clk,
                 const std::string& lib, const std::string& out, const std::string& csv,
                 int threads) {
    if (threads > 0) omp_set_num_threads(threads);
    const StateRegisterConfig design = config_from_text(read_file(design_path));
    const LeakageTable table = table_from(lib);
    SimOptions options;
    options.clk_level = clk;
    options.noise_sigma = sigma;
    options.background_offset = offset;
    options.seed = seed;
    const TraceSet traces = generate_traces(design, table, key_from(key_spec), n, options);
    save_traces(traces, out);
    if (!csv.empty()) {
        std::ostringstream buf;
        export_csv(traces, buf);
        write_text(csv, buf.str());
    }
    std::cout << "simulated " << n << " traces for " << design.label << " -> " << out << "\n";
    return 0;
}

int cmd_attack(const std::string& traces_path, const std::string& model_name_arg,
               const std::string& report_path, int threads) {
    if (threads > 0) omp_set_num_threads(threads);
    const TraceSet traces = load_traces(traces_path);
    const PowerModel model = model_from_name(model_name_arg);
    const AttackResult result = attack(traces, model);
    const std::string report = attack_report_json(result, model, traces.size());
    if (!report_path.empty()) write_text(report_path, report);

    std::cout << "model: " << model_name(model) << ", traces: " << traces.size() << "\n";
    std::cout << "recovered last-round key: " << to_hex(result.recovered_key) << "\n";
    std::cout << "true last-round key:      " << to_hex(result.true_last_round_key) << "\n";
    if (result.degenerate) std::cout << "degenerate: power vector has zero variance\n";
    std::cout << (result.success ? "SUCCESS: all 16 key bytes recovered"
                                 : "FAILURE: key not fully recovered")
              << "\n";
    return 0;
}

int cmd_nttd(const std::string& traces_path, const std::string& model_name_arg,
             const PlanFlags& pf, bool both_models, const std::string& design_path,
             const std::string& lib, const std::string& out, const std::string& curve_path,
             int threads) {
    if (threads > 0) omp_set_num_threads(threads);
    const TraceSet traces = load_traces(traces_path);
    const SamplingPlan plan = pf.plan(traces.size());

    std::optional<double> area, overhead;
    if (!design_path.empty()) {
        const StateRegisterConfig design = config_from_text(read_file(design_path));
        const LeakageTable table = table_from(lib);
        const auto reference = StateRegisterConfig::uniform(CellType::HVT, DriveStrength::X2);
        const AreaReport ar = area_report(design, reference, table);
        area = ar.absolute;
        overhead = ar.overhead;
    }

    auto describe = [&](const NttdEstimate& est) {
        if (est.disclosed())
            std::cout << "  " << model_name(est.model) << ": NTTD = " << *est.nttd << "\n";
        else
            std::cout << "  " << model_name(est.model) << ": not disclosed within "
                      << traces.size() << " traces\n";
    };

    if (both_models) {
        const ModelComparison cmp = compare_models(traces, plan);
        describe(cmp.hd);
        describe(cmp.hw);
        std::cout << "winner: " << (cmp.winner ? model_name(*cmp.winner) : "none") << "\n";
        const NttdEstimate& best =
            cmp.winner == PowerModel::HW ? cmp.hw : cmp.hd;
        if (!out.empty())
            write_text(out, estimate_to_json(best, traces.config_label, area, overhead));
        if (!curve_path.empty()) {
            std::ostringstream buf;
            write_curve_csv(best, buf);
            write_text(curve_path, buf.str());
        }
        return 0;
    }

    const PowerModel model = model_from_name(model_name_arg);
    const NttdEstimate est = estimate_nttd(traces, plan, model);
    describe(est);
    for (std::size_t w : est.monotonicity_warnings)
        std::cout << "  warning: success rate dips beyond 3 sigma at n=" << w << "\n";
    if (!out.empty()) write_text(out, estimate_to_json(est, traces.config_label, area, overhead));
    if (!curve_path.empty()) {
        std::ostringstream buf;
        write_curve_csv(est, buf);
        write_text(curve_path, buf.str());
    }
    return 0;
}

ExperimentConfig experiment_from_flags(const std::string& config_path, std::size_t pool,
                                       int datasets, std::uint64_t master_seed,
                                       const std::string& key_spec, const PlanFlags& pf,
                                       const std::string& lib, const std::string& out_dir,
                                       int threads, const std::string& model) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = experiment_config_from_json(read_file(config_path));
    if (pool != 0) cfg.pool_size = pool;
    if (datasets != 0) cfg.datasets = datasets;
    if (master_seed != 0) cfg.master_seed = master_seed;
    if (!key_spec.empty()) {
        if (key_spec.starts_with("random:")) {
            cfg.random_key = true;
        } else {
            cfg.random_key = false;
            cfg.key = block_from_hex(key_spec);
        }
    }
    cfg.plan = pf.plan(cfg.pool_size);
    if (!lib.empty()) cfg.table = table_from(lib);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (!model.empty()) cfg.model = model_from_name(model);
    return cfg;
}

int cmd_sweep_baseline(const ExperimentConfig& cfg) {
    const BaselineSweepResult result = run_baseline_sweep(cfg);
    std::cout << "lvt_bits,mean_nttd,disclosed,censored\n";
    for (const auto& mp : result.means())
        std::cout << mp.lvt_bits << ","
                  << (mp.mean_nttd ? fmt_double(*mp.mean_nttd) : "NA") << ","
                  << mp.disclosed_count << "," << mp.censored_count << "\n";
    if (!cfg.out_dir.empty()) std::cout << "files written to " << cfg.out_dir.string() << "\n";
    return 0;
}

int cmd_grid(const ExperimentConfig& cfg, const std::string& mode) {
    const Study study = mode == "lvt-strength" ? Study::GridLvtStrength : Study::GridLvtOnly;
    const GridResult grid = run_grid(cfg, study);
    std::cout << "half_a,half_b,mean_nttd,disclosed,censored,mean_overhead\n";
    for (const auto& a : grid.average)
        std::cout << a.half_a << "," << a.half_b << ","
                  << (a.mean_nttd ? fmt_double(*a.mean_nttd) : "NA") << "," << a.disclosed_count
                  << "," << a.censored_count << "," << fmt_double(a.mean_overhead) << "\n";
    if (!cfg.out_dir.empty()) std::cout << "files written to " << cfg.out_dir.string() << "\n";
    return 0;
}

SummaryEntry entry_from_json_file(const std::string& path) {
    const auto j = nlohmann::json::parse(read_file(path));
    SummaryEntry e;
    e.label = j.value("label", path);
    if (e.label.empty()) e.label = path;
    if (!j.contains("area") || j["area"].is_null())
        throw std::invalid_argument(path + ": estimate lacks an area (rerun nttd with --design)");
    e.area = j["area"].get<double>();
    if (!j["nttd"].is_null()) e.nttd = j["nttd"].get<std::size_t>();
    e.pool_size = j["pool_size"].get<std::size_t>();
    return e;
}

int cmd_report(const std::string& baseline_path, const std::vector<std::string>& entry_paths,
               const std::string& out) {
    const SummaryEntry baseline = entry_from_json_file(baseline_path);
    std::vector<SummaryEntry> entries;
    for (const auto& p : entry_paths) entries.push_back(entry_from_json_file(p));
    const auto rows = build_summary(baseline, entries);
    std::cout << summary_text(rows);
    if (!out.empty()) write_text(out, summary_csv(rows));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spsclab: static-power side-channel laboratory for an AES-128 core"};
    app.require_subcommand(1);

    std::string lib, out, csv, traces_path, design_path, key_spec = "random:1";
    std::string model = "hd", report_path, curve_path, config_path, out_dir, grid_mode = "lvt-only";
    std::string baseline_path;
    std::vector<std::string> entry_paths;
    std::size_t n = 50000, pool = 0;
    std::uint64_t seed = 0, master_seed = 0;
    double sigma = 0.0, offset = 0.0, lvt_mix = 0.0;
    int clk = 0, threads = 0, datasets = 0;
    int baseline_lvt = -1, half_a = 0, half_b = 0, paths_a = 1, paths_b = 1;
    bool shared_constant = false, both_models = false;
    std::string policy_a = "constant", policy_b = "constant";
    PlanFlags pf;

    auto* gen = app.add_subcommand("gen-design", "Generate a state-register cell assignment");
    gen->add_option("--baseline-lvt", baseline_lvt, "Baseline with N LVT bits per byte (0..8)");
    auto* ga = gen->add_option("--half-a", half_a, "Primitives per byte, first half {0,2,4,6,8}");
    gen->add_option("--half-b", half_b, "Primitives per byte, second half {0,2,4,6,8}");
    gen->add_option("--policy-a", policy_a, "Strength policy: constant|per-ff");
    gen->add_option("--policy-b", policy_b, "Strength policy: constant|per-ff");
    gen->add_option("--paths-a", paths_a, "Primitive paths in half A (1 or 2)");
    gen->add_option("--paths-b", paths_b, "Primitive paths in half B (1 or 2)");
    gen->add_option("--lvt-mix", lvt_mix, "LVT fraction of non-primitive bits");
    gen->add_flag("--shared-constant", shared_constant,
                  "One random constant strength for both halves");
    gen->add_option("--seed", seed, "Design seed");
    gen->add_option("-o,--out", out, "Output design file")->required();
    gen->add_option("--cell-library", lib, "Cell library file (default: built-in)");

    auto* sim = app.add_subcommand("simulate", "Generate a static-power trace pool");
    sim->add_option("--design", design_path, "Design file")->required();
    sim->add_option("--key", key_spec, "Key as 32 hex chars or random:<seed>");
    sim->add_option("-n,--traces", n, "Number of traces");
    sim->add_option("--seed", seed, "Simulation seed");
    sim->add_option("--sigma", sigma, "Gaussian noise std-dev");
    sim->add_option("--offset", offset, "Constant background offset");
    sim->add_option("--clk", clk, "Halted clock level (0 or 1)");
    sim->add_option("--cell-library", lib, "Cell library file");
    sim->add_option("-o,--out", out, "Output trace file")->required();
    sim->add_option("--csv", csv, "Also export traces as CSV");
    sim->add_option("--threads", threads, "Worker threads");

    auto* atk = app.add_subcommand("attack", "Run last-round CPA on a trace pool");
    atk->add_option("--traces", traces_path, "Trace file")->required();
    atk->add_option("--model", model, "Power model: hw|hd");
    atk->add_option("--report", report_path, "Write the attack report JSON here");
    atk->add_option("--threads", threads, "Worker threads");

    auto* nt = app.add_subcommand("nttd", "Estimate traces-to-disclosure by two-phase sampling");
    nt->add_option("--traces", traces_path, "Trace file")->required();
    nt->add_option("--model", model, "Power model: hw|hd");
    nt->add_flag("--both-models", both_models, "Run HW and HD, report the winner");
    pf.add_to(*nt);
    nt->add_option("--design", design_path, "Design file (adds area to the estimate)");
    nt->add_option("--cell-library", lib, "Cell library file");
    nt->add_option("-o,--out", out, "Write the estimate JSON here");
    nt->add_option("--curve", curve_path, "Write the success curve CSV here");
    nt->add_option("--threads", threads, "Worker threads");

    auto* swp = app.add_subcommand("sweep-baseline", "Baseline LVT-count sweep");
    auto* grd = app.add_subcommand("grid", "Countermeasure grid study");
    grd->add_option("--mode", grid_mode, "lvt-only | lvt-strength");
    for (CLI::App* cmd : {swp, grd}) {
        cmd->add_option("--config", config_path, "Experiment config JSON");
        cmd->add_option("--pool", pool, "Trace pool size per design");
        cmd->add_option("--datasets", datasets, "Independent randomized datasets");
        cmd->add_option("--master-seed", master_seed, "Master seed");
        cmd->add_option("--key", key_spec, "Key as hex or random:<seed>");
        pf.add_to(*cmd);
        cmd->add_option("--cell-library", lib, "Cell library file");
        cmd->add_option("--out-dir", out_dir, "Output directory")->required();
        cmd->add_option("--threads", threads, "Worker threads");
        cmd->add_option("--model", model, "Power model for grid cells: hw|hd");
    }

    auto* rep = app.add_subcommand("report", "Summarize NTTD/area across designs");
    rep->add_option("--baseline", baseline_path, "Baseline estimate JSON")->required();
    rep->add_option("--entry", entry_paths, "Countermeasure estimate JSON (repeatable)");
    rep->add_option("-o,--out", out, "Write the summary CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen_design(baseline_lvt, static_cast<bool>(*ga) || half_a || half_b,
                                  half_a, half_b, policy_a, policy_b, paths_a, paths_b, lvt_mix,
                                  shared_constant, seed, out, lib);
        if (sim->parsed())
            return cmd_simulate(design_path, key_spec, n, seed, sigma, offset, clk, lib, out,
                                csv, threads);
        if (atk->parsed()) return cmd_attack(traces_path, model, report_path, threads);
        if (nt->parsed())
            return cmd_nttd(traces_path, model, pf, both_models, design_path, lib, out,
                            curve_path, threads);
        if (swp->parsed() || grd->parsed()) {
            const ExperimentConfig cfg = experiment_from_flags(
                config_path, pool, datasets, master_seed, key_spec, pf, lib, out_dir, threads,
                model);
            return swp->parsed() ? cmd_sweep_baseline(cfg) : cmd_grid(cfg, grid_mode);
        }
        if (rep->parsed()) return cmd_report(baseline_path, entry_paths, out);
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
