#include "spsc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spsc/textio.hpp"

namespace spsc {

namespace {

std::vector<std::uint32_t> sample_without_replacement(std::size_t pool, std::size_t n, Rng& rng) {
    std::vector<std::uint32_t> idx(pool);
    std::iota(idx.begin(), idx.end(), 0u);
    partial_shuffle(std::span<std::uint32_t>(idx), n, rng);
    idx.resize(n);
    // Sorted subsample: attack sums then run in pool order, so a full-pool
    // draw is bit-identical to attacking the pool directly.
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

void SamplingPlan::validate() const {
    if (pool_size < 2) throw std::invalid_argument("sampling plan: pool too small");
    if (coarse_trials < 1 || thorough_trials < 1)
        throw std::invalid_argument("sampling plan: trials must be >= 1");
    if (!(success_threshold > 0.0 && success_threshold <= 1.0))
        throw std::invalid_argument("sampling plan: threshold must be in (0,1]");
    if (coarse_steps < 1) throw std::invalid_argument("sampling plan: coarse_steps must be >= 1");
    if (refine_points < 1) throw std::invalid_argument("sampling plan: refine_points must be >= 1");
    if (grid_start < 2) throw std::invalid_argument("sampling plan: grid_start must be >= 2");
}

SamplingPlan SamplingPlan::paper_scale(std::size_t pool) {
    SamplingPlan p;
    p.pool_size = pool;
    p.coarse_trials = 64;
    p.thorough_trials = 640;
    return p;
}

SamplingPlan SamplingPlan::desk_scale(std::size_t pool) {
    SamplingPlan p;
    p.pool_size = pool;
    p.coarse_trials = 16;
    p.thorough_trials = 64;
    return p;
}

namespace detail {

int run_trials(std::size_t n, int trials, std::uint64_t seed,
               const std::function<bool(int, Rng&)>& trial) {
    int successes = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : successes)
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, kStreamTrial, n, static_cast<std::uint64_t>(t)));
        if (trial(t, rng)) ++successes;
    }
    return successes;
}

}  // namespace detail

double success_rate(const TraceSet& pool, std::size_t n, int trials, PowerModel model,
                    std::uint64_t seed) {
    return success_point(pool, n, trials, model, seed, SamplePhase::Coarse).rate;
}

SuccessPoint success_point(const TraceSet& pool, std::size_t n, int trials, PowerModel model,
                           std::uint64_t seed, SamplePhase phase) {
    if (n < 2) throw std::invalid_argument("success_rate: n must be >= 2");
    if (n > pool.size()) throw std::invalid_argument("success_rate: n exceeds the pool");

    const int successes =
        detail::run_trials(n, trials, seed, [&](int /*trial*/, Rng& rng) {
            const auto idx = sample_without_replacement(pool.size(), n, rng);
            return attack_subset(pool, model, idx).success;
        });

    SuccessPoint sp;
    sp.n = n;
    sp.trials = trials;
    sp.successes = successes;
    sp.rate = static_cast<double>(successes) / static_cast<double>(trials);
    sp.phase = phase;
    return sp;
}

std::vector<std::size_t> coarse_grid(const SamplingPlan& plan) {
    const std::size_t pool = plan.pool_size;
    const std::size_t start = std::max<std::size_t>(2, std::min(plan.grid_start, pool));
    std::vector<std::size_t> grid;
    if (plan.coarse_steps == 1 || start >= pool) {
        grid.push_back(pool);
    } else if (plan.log_spacing) {
        const double lo = std::log(static_cast<double>(start));
        const double hi = std::log(static_cast<double>(pool));
        for (int i = 0; i < plan.coarse_steps; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(plan.coarse_steps - 1);
            grid.push_back(static_cast<std::size_t>(std::llround(std::exp(lo + f * (hi - lo)))));
        }
    } else {
        for (int i = 0; i < plan.coarse_steps; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(plan.coarse_steps - 1);
            grid.push_back(static_cast<std::size_t>(
                std::llround(static_cast<double>(start) + f * static_cast<double>(pool - start))));
        }
    }
    for (auto& g : grid) g = std::clamp<std::size_t>(g, 2, pool);
    grid.front() = start;
    grid.back() = pool;
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::vector<std::size_t> refine_grid(std::size_t lo, std::size_t hi, int points) {
    // `points` evenly spaced counts in (lo, hi], the last one exactly hi.
    std::vector<std::size_t> grid;
    for (int i = 1; i <= points; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(points);
        std::size_t v = lo + static_cast<std::size_t>(
                                 std::llround(f * static_cast<double>(hi - lo)));
        v = std::clamp<std::size_t>(v, 2, hi);
        if (grid.empty() || v > grid.back()) grid.push_back(v);
    }
    if (grid.empty() || grid.back() != hi) grid.push_back(hi);
    return grid;
}

NttdEstimate estimate_nttd(const TraceSet& pool, const SamplingPlan& plan_in, PowerModel model) {
    SamplingPlan plan = plan_in;
    if (plan.pool_size == 0) plan.pool_size = pool.size();
    plan.validate();
    if (plan.pool_size > pool.size())
        throw std::invalid_argument("estimate_nttd: plan pool_size exceeds the trace set");

    NttdEstimate est;
    est.plan = plan;
    est.model = model;

    const auto grid = coarse_grid(plan);
    std::size_t bracket_lo = 2;
    for (std::size_t gi = 0; gi < grid.size() && !est.nttd; ++gi) {
        const std::size_t g = grid[gi];
        const SuccessPoint sp =
            success_point(pool, g, plan.coarse_trials, model, plan.seed, SamplePhase::Coarse);
        est.curve.push_back(sp);
        if (!meets_threshold(sp.successes, sp.trials, plan.success_threshold)) {
            bracket_lo = g;
            continue;
        }
        // Thorough pass over the refined grid inside (bracket_lo, g]. If the
        // coarse crossing does not survive thorough trials, the coarse scan
        // resumes from g.
        for (std::size_t r : refine_grid(bracket_lo, g, plan.refine_points)) {
            const SuccessPoint tp =
                success_point(pool, r, plan.thorough_trials, model, plan.seed, SamplePhase::Thorough);
            est.curve.push_back(tp);
            if (meets_threshold(tp.successes, tp.trials, plan.success_threshold)) {
                est.nttd = r;
                break;
            }
        }
        bracket_lo = g;
    }

    est.monotonicity_warnings = detail::monotonicity_warnings(est.curve);
    return est;
}

ModelComparison compare_models(const TraceSet& pool, const SamplingPlan& plan) {
    ModelComparison cmp;
    cmp.hw = estimate_nttd(pool, plan, PowerModel::HW);
    cmp.hd = estimate_nttd(pool, plan, PowerModel::HD);
    if (cmp.hw.disclosed() && cmp.hd.disclosed()) {
        if (*cmp.hd.nttd < *cmp.hw.nttd)
            cmp.winner = PowerModel::HD;
        else if (*cmp.hw.nttd < *cmp.hd.nttd)
            cmp.winner = PowerModel::HW;
    } else if (cmp.hd.disclosed()) {
        cmp.winner = PowerModel::HD;
    } else if (cmp.hw.disclosed()) {
        cmp.winner = PowerModel::HW;
    }
    return cmp;
}

namespace detail {

std::vector<std::size_t> monotonicity_warnings(const std::vector<SuccessPoint>& curve) {
    std::vector<std::size_t> warnings;
    for (SamplePhase phase : {SamplePhase::Coarse, SamplePhase::Thorough}) {
        const SuccessPoint* prev = nullptr;
        for (const auto& sp : curve) {
            if (sp.phase != phase) continue;
            if (prev && sp.n > prev->n) {
                const double se = std::sqrt(
                    prev->rate * (1.0 - prev->rate) / static_cast<double>(prev->trials) +
                    sp.rate * (1.0 - sp.rate) / static_cast<double>(sp.trials));
                if (sp.rate < prev->rate - 3.0 * se) warnings.push_back(sp.n);
            }
            prev = &sp;
        }
    }
    return warnings;
}

}  // namespace detail

void write_curve_csv(const NttdEstimate& estimate, std::ostream& out) {
    out << "n,trials,successes,rate,phase\n";
    for (const auto& sp : estimate.curve)
        out << sp.n << "," << sp.trials << "," << sp.successes << "," << fmt_double(sp.rate) << ","
            << (sp.phase == SamplePhase::Coarse ? "coarse" : "thorough") << "\n";
}

std::string estimate_to_json(const NttdEstimate& estimate, std::string_view label,
                             std::optional<double> area, std::optional<double> overhead) {
    nlohmann::ordered_json j;
    j["label"] = std::string(label);
    j["model"] = std::string(model_name(estimate.model));
    j["pool_size"] = estimate.plan.pool_size;
    if (estimate.nttd)
        j["nttd"] = *estimate.nttd;
    else
        j["nttd"] = nullptr;
    j["disclosed"] = estimate.disclosed();
    if (area) j["area"] = *area;
    if (overhead) j["overhead"] = *overhead;
    j["plan"] = {{"coarse_trials", estimate.plan.coarse_trials},
                 {"thorough_trials", estimate.plan.thorough_trials},
                 {"success_threshold", estimate.plan.success_threshold},
                 {"coarse_steps", estimate.plan.coarse_steps},
                 {"grid_start", estimate.plan.grid_start},
                 {"log_spacing", estimate.plan.log_spacing},
                 {"refine_points", estimate.plan.refine_points},
                 {"seed", estimate.plan.seed}};
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (const auto& sp : estimate.curve)
        curve.push_back({{"n", sp.n},
                         {"trials", sp.trials},
                         {"successes", sp.successes},
                         {"rate", sp.rate},
                         {"phase", sp.phase == SamplePhase::Coarse ? "coarse" : "thorough"}});
    j["curve"] = curve;
    if (!estimate.monotonicity_warnings.empty())
        j["monotonicity_warnings"] = estimate.monotonicity_warnings;
    return j.dump(2) + "\n";
}

}  // namespace spsc
