#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spsc/aes.hpp"
#include "spsc/design.hpp"
#include "spsc/leakage.hpp"
#include "spsc/rng.hpp"

namespace spsc {

struct SimOptions {
    int clk_level = 0;              // halted clock level during measurement
    double noise_sigma = 0.0;       // Gaussian std-dev, normalized leakage units
    double background_offset = 0.0; // constant data-independent term
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

// One static-power scalar per encryption plus the blocks that produced it.
struct TraceSet {
    Block key;
    std::vector<Block> plaintexts;
    std::vector<Block> ciphertexts;
    std::vector<Block> pre_final_states;
    std::vector<double> power;
    SimOptions options;
    std::string config_label;

    std::size_t size() const { return power.size(); }
};

// Static power of one halted final-round cycle. Per bit, D is the incoming
// ciphertext bit and Q the pre-final-round bit; a two-path primitive draws a
// CTL bit from `rng` (ascending bit order) and its inactive path re-expresses
// the previous value as D = Q = q_prev through the feedback loop. When
// noise_sigma > 0 one Gaussian draw is consumed after the CTL bits.
double simulate_one(const StateRegisterConfig& config, const LeakageTable& table,
                    const RoundTrace& rt, const SimOptions& options, Rng& rng);

// n encryptions of uniformly random plaintexts. Per-trace RNG substreams are
// derived from (options.seed, trace index), so the result is identical for
// any worker count.
TraceSet generate_traces(const StateRegisterConfig& config, const LeakageTable& table,
                         const Block& key, std::size_t n, const SimOptions& options);

// Binary trace file: magic "SPSCTRC1", u32 version, u64 n, 16-byte key, then
// n records of (plaintext 16B, ciphertext 16B, power f64), all little-endian.
// A JSON sidecar at <path>.meta carries the config label and options.
void save_traces(const TraceSet& traces, const std::filesystem::path& path);
TraceSet load_traces(const std::filesystem::path& path);

// CSV interchange: plaintext,ciphertext,power (hex blocks, decimal power).
void export_csv(const TraceSet& traces, std::ostream& out);

}  // namespace spsc
