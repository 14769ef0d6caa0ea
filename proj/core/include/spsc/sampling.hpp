#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spsc/cpa.hpp"
#include "spsc/trace.hpp"

namespace spsc {

enum class SamplePhase : std::uint8_t { Coarse, Thorough };

// Two-phase subsampling plan: a coarse scan with few trials over a wide grid
// brackets the crossing, then a thorough scan with many trials pins it down.
struct SamplingPlan {
    std::size_t pool_size = 0;  // 0 = take the trace set's size
    int coarse_trials = 64;
    int thorough_trials = 640;
    double success_threshold = 0.90;  // inclusive: 576/640 passes
    int coarse_steps = 20;
    std::size_t grid_start = 1000;  // clamped to the pool when larger
    bool log_spacing = true;
    int refine_points = 8;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument

    // Paper-scale plan: 64/640 trials over a 1M pool.
    static SamplingPlan paper_scale(std::size_t pool);
    // Desk-scale plan: 16/64 trials over a 50k pool.
    static SamplingPlan desk_scale(std::size_t pool);
};

struct SuccessPoint {
    std::size_t n = 0;
    int trials = 0;
    int successes = 0;
    double rate = 0.0;
    SamplePhase phase = SamplePhase::Coarse;
};

struct NttdEstimate {
    std::optional<std::size_t> nttd;  // empty = not disclosed within the pool
    std::vector<SuccessPoint> curve;  // every evaluated point, in order
    // Trace counts where the rate dropped by more than 3 binomial standard
    // errors against the previous same-phase point.
    std::vector<std::size_t> monotonicity_warnings;
    SamplingPlan plan;
    PowerModel model = PowerModel::HD;

    bool disclosed() const { return nttd.has_value(); }
};

inline bool meets_threshold(int successes, int trials, double threshold) {
    return static_cast<double>(successes) / static_cast<double>(trials) >= threshold;
}

// Fraction of `trials` independent attacks that recover the full key, each on
// n traces drawn without replacement. Trial substreams are keyed by
// (seed, n, trial index); results are independent of worker count.
double success_rate(const TraceSet& pool, std::size_t n, int trials, PowerModel model,
                    std::uint64_t seed);
SuccessPoint success_point(const TraceSet& pool, std::size_t n, int trials, PowerModel model,
                           std::uint64_t seed, SamplePhase phase);

// The grids the two phases walk. Exposed so oracles and reports can rebuild
// them from the plan alone.
std::vector<std::size_t> coarse_grid(const SamplingPlan& plan);
std::vector<std::size_t> refine_grid(std::size_t lo, std::size_t hi, int points);

NttdEstimate estimate_nttd(const TraceSet& pool, const SamplingPlan& plan, PowerModel model);

struct ModelComparison {
    NttdEstimate hw;
    NttdEstimate hd;
    std::optional<PowerModel> winner;  // strictly smaller NTTD; empty on ties
};
ModelComparison compare_models(const TraceSet& pool, const SamplingPlan& plan);

// CSV with columns n,trials,successes,rate,phase.
void write_curve_csv(const NttdEstimate& estimate, std::ostream& out);

std::string estimate_to_json(const NttdEstimate& estimate, std::string_view label,
                             std::optional<double> area = std::nullopt,
                             std::optional<double> overhead = std::nullopt);

namespace detail {

// Trial driver shared by success_rate and the estimator sanity tests: runs
// `trials` instances of `trial(trial_index, rng)` on substreams keyed by
// (seed, n, trial index) and counts successes.
int run_trials(std::size_t n, int trials, std::uint64_t seed,
               const std::function<bool(int, Rng&)>& trial);

std::vector<std::size_t> monotonicity_warnings(const std::vector<SuccessPoint>& curve);

}  // namespace detail

}  // namespace spsc
