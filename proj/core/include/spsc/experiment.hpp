#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spsc/design.hpp"
#include "spsc/sampling.hpp"
#include "spsc/trace.hpp"

namespace spsc {

enum class Study : std::uint8_t { BaselineSweep, GridLvtOnly, GridLvtStrength, Custom };

std::string_view study_name(Study s);

// One reproducible study at configurable scale. Every dataset, design and
// pool seed is derived from master_seed, so a rerun emits byte-identical
// files for any worker count.
struct ExperimentConfig {
    Study study = Study::BaselineSweep;
    int datasets = 3;
    std::size_t pool_size = 50000;
    SamplingPlan plan = SamplingPlan::desk_scale(50000);
    SimOptions sim;
    LeakageTable table = default_table();
    Block key{};
    bool random_key = true;  // key drawn from master_seed when set
    std::uint64_t master_seed = 1;
    PowerModel model = PowerModel::HD;  // grid and custom studies
    double grid_lvt_mix = 0.0;          // plain cells in grid designs: RVT/HVT only
    std::filesystem::path out_dir;
    std::filesystem::path design_file;  // Custom study input
    int threads = 0;                    // 0 = leave the OpenMP default

    void validate() const;
    Block effective_key() const;
};

ExperimentConfig experiment_config_from_json(std::string_view text);

struct BaselinePoint {
    int lvt_bits = 0;
    int dataset = 0;
    std::uint64_t design_seed = 0;
    std::uint64_t pool_seed = 0;
    NttdEstimate hd;
    NttdEstimate hw;

    const NttdEstimate& best() const;
};

struct BaselineSweepResult {
    std::vector<BaselinePoint> points;  // lvt 0..8 x datasets

    // Mean best-model NTTD over the disclosed datasets of one LVT count.
    struct MeanPoint {
        int lvt_bits = 0;
        std::optional<double> mean_nttd;
        int disclosed_count = 0;
        int censored_count = 0;
    };
    std::vector<MeanPoint> means() const;
};

BaselineSweepResult run_baseline_sweep(const ExperimentConfig& cfg);

struct GridCell {
    int dataset = 0;
    int half_a = 0;
    int half_b = 0;
    std::uint64_t design_seed = 0;
    std::uint64_t pool_seed = 0;
    NttdEstimate est;
    double area = 0.0;
    double overhead = 0.0;  // vs the all-plain X2 reference register bank
};

struct GridAverageCell {
    int half_a = 0;
    int half_b = 0;
    std::optional<double> mean_nttd;  // over disclosed datasets only
    int disclosed_count = 0;
    int censored_count = 0;
    double mean_area = 0.0;
    double mean_overhead = 0.0;
};

struct GridResult {
    Study mode = Study::GridLvtOnly;
    std::size_t pool_size = 0;
    int datasets = 0;
    std::uint64_t master_seed = 0;
    std::vector<GridCell> cells;
    std::vector<GridAverageCell> average;
};

// Censored (not-disclosed) datasets are excluded from the mean and counted
// explicitly; sentinels are never averaged in.
std::vector<GridAverageCell> average_grid(const std::vector<GridCell>& cells);

// The (half_a, half_b) cells a study populates: strict lower triangle for
// LvtOnly, the full 5x5 grid for LvtStrength.
std::vector<std::pair<int, int>> grid_cells(Study mode);

// The design recipe behind one grid cell.
DesignSpec grid_design_spec(Study mode, int half_a, int half_b, double lvt_mix,
                            std::uint64_t design_seed);

GridResult run_grid(const ExperimentConfig& cfg, Study mode);

std::string grid_to_json(const GridResult& grid);
GridResult grid_from_json(std::string_view text);

// Custom study: NTTD of a user-supplied design, replicated over datasets.
struct CustomResult {
    std::vector<GridCell> cells;  // half counts unused; one row per dataset
};
CustomResult run_custom(const ExperimentConfig& cfg);

// Table-IV-style summary. The baseline row comes first; each row reports
// area, overhead, NTTD, NTTD/area and the resilience ratio vs baseline, with
// ">x" sentinels when the pool was exhausted before disclosure.
struct SummaryEntry {
    std::string label;
    double area = 0.0;
    std::optional<std::size_t> nttd;
    std::size_t pool_size = 0;
};

struct SummaryRow {
    std::string label;
    std::string area;
    std::string overhead;
    std::string nttd;
    std::string nttd_per_area;
    std::string resilience_ratio;
};

std::vector<SummaryRow> build_summary(const SummaryEntry& baseline,
                                      const std::vector<SummaryEntry>& entries);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_text(const std::vector<SummaryRow>& rows);

// Seed derivation shared by the runner and the reproducibility tests.
std::uint64_t dataset_seed(std::uint64_t master_seed, int dataset);
std::uint64_t design_seed_for(std::uint64_t dataset_seed_value, int half_a, int half_b);
std::uint64_t baseline_design_seed(std::uint64_t dataset_seed_value, int lvt_bits);
std::uint64_t pool_seed_for(std::uint64_t design_seed_value);
std::uint64_t plan_seed_for(std::uint64_t design_seed_value);

}  // namespace spsc
