#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spsc {

enum class CellType : std::uint8_t { LVT = 0, RVT = 1, HVT = 2 };
enum class DriveStrength : std::uint8_t { X2 = 0, X4 = 1, X8 = 2 };

inline constexpr std::array<CellType, 3> kCellTypes = {CellType::LVT, CellType::RVT,
                                                       CellType::HVT};
inline constexpr std::array<DriveStrength, 3> kDriveStrengths = {
    DriveStrength::X2, DriveStrength::X4, DriveStrength::X8};

constexpr int strength_multiplier(DriveStrength s) {
    return s == DriveStrength::X2 ? 2 : s == DriveStrength::X4 ? 4 : 8;
}

std::string_view cell_name(CellType c);
std::string_view strength_name(DriveStrength s);
CellType cell_from_name(std::string_view name);            // throws on unknown
DriveStrength strength_from_name(std::string_view name);   // throws on unknown

// Flip-flop pin snapshot at the sampled (halted) cycle.
struct PinState {
    std::uint8_t clk = 0;
    std::uint8_t d = 0;
    std::uint8_t q = 0;

    int index() const { return clk * 4 + d * 2 + q; }
    friend bool operator==(const PinState&, const PinState&) = default;
};

class SchemaError : public std::runtime_error {
  public:
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Normalized D-FF leakage currents per (cell type, pin state), plus relative
// cell areas and the constant leakage/area of the primitive's 2-to-1 mux.
// Values are dimensionless: leakage in multiples of the HVT cell, area in
// multiples of an X2 flip-flop. Immutable once built; share freely.
struct LeakageTable {
    // leakage[cell][pin index], 3 x 8 entries.
    std::array<std::array<double, 8>, 3> leakage{};
    // area[cell][strength], 3 x 3 entries.
    std::array<std::array<double, 3>, 3> area{};
    double mux_leakage = 0.0;
    double mux_area = 0.0;

    double value(CellType c, PinState p) const {
        return leakage[static_cast<std::size_t>(c)][static_cast<std::size_t>(p.index())];
    }
    double cell_area(CellType c, DriveStrength s) const {
        return area[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)];
    }

    // Throws SchemaError naming the offending entry.
    void validate() const;

    friend bool operator==(const LeakageTable&, const LeakageTable&) = default;
};

// The built-in table. The leakage entries are characterized at the X2
// reference strength; areas default to multiplier/2 regardless of cell type.
LeakageTable default_table();

// Parses a cell-library document (see data/cell_library.txt for the schema:
// sections [leakage], [area], [mux]; keys like LVT.010 and LVT.X4).
// [area] and [mux] may be omitted and then fall back to the defaults.
LeakageTable load_table(std::string_view text);
std::string to_text(const LeakageTable& table);

// Leakage of one flip-flop: table value scaled linearly by multiplier/2,
// with X2 the reference strength.
inline double ff_leakage(const LeakageTable& table, CellType cell, DriveStrength strength,
                         PinState pins) {
    return table.value(cell, pins) * (strength_multiplier(strength) / 2.0);
}

}  // namespace spsc
