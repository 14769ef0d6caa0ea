#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "spsc/aes.hpp"
#include "spsc/trace.hpp"

namespace spsc {

enum class PowerModel : std::uint8_t { HW, HD };

std::string_view model_name(PowerModel m);
PowerModel model_from_name(std::string_view name);  // throws on unknown

struct CpaScores {
    // pcc[j][k]: Pearson correlation of the byte-j hypothesis under guess k
    // against the power vector.
    std::array<std::array<double, 256>, 16> pcc{};
    std::array<std::uint8_t, 16> best_guess{};  // argmax |pcc|, ties to lowest k
    std::array<double, 16> margin{};            // top-1 minus top-2 |pcc|
};

struct AttackResult {
    CpaScores scores;
    Block recovered_key;        // last-round key guess (not mapped back)
    Block true_last_round_key;  // derived from the trace set's key
    bool success = false;       // all 16 bytes match the true last-round key
    bool degenerate = false;    // power vector had zero variance
};

struct PearsonResult {
    double r = 0.0;
    bool degenerate = false;
};

// Two-pass (centered) Pearson correlation; r = 0 and degenerate = true when
// either vector has zero variance. Throws std::invalid_argument on length
// mismatch or length < 2.
PearsonResult pearson_checked(std::span<const double> x, std::span<const double> y);
double pearson(std::span<const double> x, std::span<const double> y);

// Single-pass raw-moment variant, kept as an independent numerical route.
double pearson_streaming(std::span<const double> x, std::span<const double> y);

// Hypothesis value for ciphertext position j under key guess k. With
// m = shift_rows_origin(j) and v = inv_sbox(ct[j] ^ k) (the recovered
// pre-final-round byte at m): HW -> hw(v); HD -> hd(ct[m], v).
int hypothesis(PowerModel model, const Block& ciphertext, int byte_index, int key_guess);

// Last-round CPA over the whole set, or over the subset selected by
// `indices` when nonempty.
AttackResult attack(const TraceSet& traces, PowerModel model);
AttackResult attack_subset(const TraceSet& traces, PowerModel model,
                           std::span<const std::uint32_t> indices);

// Structured report: model, trace count, per-byte best guess, margin and
// top-5 |pcc| candidates.
std::string attack_report_json(const AttackResult& result, PowerModel model,
                               std::size_t trace_count);

}  // namespace spsc
