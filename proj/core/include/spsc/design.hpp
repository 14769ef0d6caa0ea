#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "spsc/leakage.hpp"

namespace spsc {

// One of the 128 state-register bit positions. Either a plain flip-flop of a
// given cell type, or a countermeasure primitive: one or two LVT flip-flop
// paths selected per cycle by a random CTL bit, the inactive path holding its
// previous value through an output-to-input feedback loop.
struct BitCell {
    enum class Kind : std::uint8_t { Plain, Primitive };

    Kind kind = Kind::Plain;
    CellType cell = CellType::HVT;  // Plain only; primitive paths are always LVT
    std::array<DriveStrength, 2> strengths = {DriveStrength::X2, DriveStrength::X2};
    std::uint8_t paths = 1;  // 1 for Plain; 1 or 2 for Primitive

    static BitCell plain(CellType c, DriveStrength s) {
        BitCell b;
        b.kind = Kind::Plain;
        b.cell = c;
        b.strengths[0] = s;
        b.paths = 1;
        return b;
    }
    static BitCell primitive(DriveStrength s0) {
        BitCell b;
        b.kind = Kind::Primitive;
        b.cell = CellType::LVT;
        b.strengths[0] = s0;
        b.paths = 1;
        return b;
    }
    static BitCell primitive(DriveStrength s0, DriveStrength s1) {
        BitCell b = primitive(s0);
        b.strengths[1] = s1;
        b.paths = 2;
        return b;
    }

    friend bool operator==(const BitCell&, const BitCell&) = default;
};

// Cell assignment for the 128 state-register bits, grouped as 16 bytes x 8
// bits in the aes_core byte order; bit index 0 is the byte's LSB.
struct StateRegisterConfig {
    std::array<BitCell, 128> bits{};
    std::string label;

    BitCell& bit(int byte_index, int bit_index) {
        return bits[static_cast<std::size_t>(byte_index * 8 + bit_index)];
    }
    const BitCell& bit(int byte_index, int bit_index) const {
        return bits[static_cast<std::size_t>(byte_index * 8 + bit_index)];
    }

    int primitive_count(int byte_index) const;
    int cell_count(CellType c) const;  // plain bits of that type

    static StateRegisterConfig uniform(CellType c, DriveStrength s);
};

enum class StrengthPolicy : std::uint8_t { ConstantRandom, PerFFRandom };

struct HalfSpec {
    int primitives_per_byte = 0;  // one of {0, 2, 4, 6, 8}
    StrengthPolicy policy = StrengthPolicy::ConstantRandom;
    int primitive_paths = 1;  // 1 or 2
};

// Recipe for a randomized countermeasure design: 8 randomly chosen bytes
// follow half_a, the remaining 8 follow half_b. Non-primitive bits become
// plain cells, LVT with probability lvt_mix and otherwise RVT/HVT
// alternating within the byte.
struct DesignSpec {
    HalfSpec half_a;
    HalfSpec half_b;
    double lvt_mix = 0.0;
    // When set, a single random strength is shared by every ConstantRandom
    // half (one constant across all state registers).
    bool shared_constant_strength = false;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

StateRegisterConfig generate_design(const DesignSpec& spec);

// Per-byte random LVT placement, remaining bits split evenly RVT/HVT (extra
// bit to RVT), everything plain at X2.
StateRegisterConfig generate_baseline(int lvt_bits_per_byte, std::uint64_t seed);

struct AreaReport {
    double absolute = 0.0;
    double overhead = 1.0;  // vs the supplied baseline config
};

// Additive area: plain bit = FF area; primitive = sum of path FF areas, plus
// one mux when there are two paths.
double config_area(const StateRegisterConfig& config, const LeakageTable& table);
AreaReport area_report(const StateRegisterConfig& config, const StateRegisterConfig& baseline,
                       const LeakageTable& table);

// Line-oriented serialization with stable field order (golden-file safe).
std::string to_text(const StateRegisterConfig& config);
StateRegisterConfig config_from_text(std::string_view text);  // throws SchemaError

}  // namespace spsc
