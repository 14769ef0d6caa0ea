#include "spsc/design.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

#include "spsc/rng.hpp"
#include "spsc/textio.hpp"

namespace spsc {

namespace {

DriveStrength draw_strength(Rng& rng) {
    return kDriveStrengths[rng.below(3)];
}

std::string half_text(const HalfSpec& h) {
    std::ostringstream out;
    out << h.primitives_per_byte << "/"
        << (h.policy == StrengthPolicy::ConstantRandom ? "const" : "perff") << "/p"
        << h.primitive_paths;
    return out.str();
}

}  // namespace

int StateRegisterConfig::primitive_count(int byte_index) const {
    int n = 0;
    for (int b = 0; b < 8; ++b)
        if (bit(byte_index, b).kind == BitCell::Kind::Primitive) ++n;
    return n;
}

int StateRegisterConfig::cell_count(CellType c) const {
    int n = 0;
    for (const auto& bc : bits)
        if (bc.kind == BitCell::Kind::Plain && bc.cell == c) ++n;
    return n;
}

StateRegisterConfig StateRegisterConfig::uniform(CellType c, DriveStrength s) {
    StateRegisterConfig cfg;
    cfg.bits.fill(BitCell::plain(c, s));
    cfg.label = "uniform(" + std::string(cell_name(c)) + "," + std::string(strength_name(s)) + ")";
    return cfg;
}

void DesignSpec::validate() const {
    for (const HalfSpec* h : {&half_a, &half_b}) {
        const int c = h->primitives_per_byte;
        if (c < 0 || c > 8 || c % 2 != 0)
            throw std::invalid_argument("primitives_per_byte must be in {0,2,4,6,8}");
        if (h->primitive_paths != 1 && h->primitive_paths != 2)
            throw std::invalid_argument("primitive_paths must be 1 or 2");
    }
    if (!(lvt_mix >= 0.0 && lvt_mix <= 1.0))
        throw std::invalid_argument("lvt_mix must be in [0,1]");
}

StateRegisterConfig generate_design(const DesignSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, kStreamDesign));

    // Draw order is pinned: (1) half assignment, (2) constant strengths,
    // (3) per byte: primitive positions, then per-bit cells ascending.
    std::array<int, 16> byte_order;
    std::iota(byte_order.begin(), byte_order.end(), 0);
    partial_shuffle(std::span<int>(byte_order), 16, rng);
    std::array<bool, 16> in_half_a{};
    for (int i = 0; i < 8; ++i) in_half_a[static_cast<std::size_t>(byte_order[static_cast<std::size_t>(i)])] = true;

    DriveStrength const_a = DriveStrength::X2;
    DriveStrength const_b = DriveStrength::X2;
    const bool a_const = spec.half_a.policy == StrengthPolicy::ConstantRandom;
    const bool b_const = spec.half_b.policy == StrengthPolicy::ConstantRandom;
    if (spec.shared_constant_strength) {
        const DriveStrength shared = draw_strength(rng);
        const_a = const_b = shared;
    } else {
        if (a_const) const_a = draw_strength(rng);
        if (b_const) const_b = draw_strength(rng);
    }

    StateRegisterConfig cfg;
    for (int byte = 0; byte < 16; ++byte) {
        const HalfSpec& half = in_half_a[static_cast<std::size_t>(byte)] ? spec.half_a : spec.half_b;
        const DriveStrength half_const = in_half_a[static_cast<std::size_t>(byte)] ? const_a : const_b;
        const bool per_ff = half.policy == StrengthPolicy::PerFFRandom;

        std::array<int, 8> positions;
        std::iota(positions.begin(), positions.end(), 0);
        partial_shuffle(std::span<int>(positions), static_cast<std::size_t>(half.primitives_per_byte), rng);
        std::array<bool, 8> is_primitive{};
        for (int i = 0; i < half.primitives_per_byte; ++i)
            is_primitive[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] = true;

        bool next_rvt = true;  // RVT/HVT alternation restarts per byte, RVT first
        for (int b = 0; b < 8; ++b) {
            if (is_primitive[static_cast<std::size_t>(b)]) {
                if (half.primitive_paths == 1) {
                    cfg.bit(byte, b) = BitCell::primitive(per_ff ? draw_strength(rng) : half_const);
                } else {
                    const DriveStrength s0 = per_ff ? draw_strength(rng) : half_const;
                    const DriveStrength s1 = per_ff ? draw_strength(rng) : half_const;
                    cfg.bit(byte, b) = BitCell::primitive(s0, s1);
                }
            } else {
                const double u = rng.real01();
                CellType cell;
                if (u < spec.lvt_mix) {
                    cell = CellType::LVT;
                } else {
                    cell = next_rvt ? CellType::RVT : CellType::HVT;
                    next_rvt = !next_rvt;
                }
                cfg.bit(byte, b) = BitCell::plain(cell, per_ff ? draw_strength(rng) : half_const);
            }
        }
    }

    std::ostringstream label;
    label << "design(a=" << half_text(spec.half_a) << ", b=" << half_text(spec.half_b)
          << ", mix=" << fmt_double(spec.lvt_mix)
          << (spec.shared_constant_strength ? ", shared" : "") << ") seed=" << spec.seed;
    cfg.label = label.str();
    return cfg;
}

StateRegisterConfig generate_baseline(int lvt_bits_per_byte, std::uint64_t seed) {
    if (lvt_bits_per_byte < 0 || lvt_bits_per_byte > 8)
        throw std::invalid_argument("lvt_bits_per_byte must be in 0..8");
    Rng rng(derive_seed(seed, kStreamDesign));

    StateRegisterConfig cfg;
    for (int byte = 0; byte < 16; ++byte) {
        std::array<int, 8> positions;
        std::iota(positions.begin(), positions.end(), 0);
        partial_shuffle(std::span<int>(positions), static_cast<std::size_t>(lvt_bits_per_byte), rng);
        std::array<bool, 8> is_lvt{};
        for (int i = 0; i < lvt_bits_per_byte; ++i)
            is_lvt[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] = true;

        bool next_rvt = true;
        for (int b = 0; b < 8; ++b) {
            CellType cell;
            if (is_lvt[static_cast<std::size_t>(b)]) {
                cell = CellType::LVT;
            } else {
                cell = next_rvt ? CellType::RVT : CellType::HVT;
                next_rvt = !next_rvt;
            }
            cfg.bit(byte, b) = BitCell::plain(cell, DriveStrength::X2);
        }
    }

    std::ostringstream label;
    label << "baseline(lvt_bits_per_byte=" << lvt_bits_per_byte << ") seed=" << seed;
    cfg.label = label.str();
    return cfg;
}

double config_area(const StateRegisterConfig& config, const LeakageTable& table) {
    double total = 0.0;
    for (const BitCell& bc : config.bits) {
        if (bc.kind == BitCell::Kind::Plain) {
            total += table.cell_area(bc.cell, bc.strengths[0]);
        } else {
            for (int p = 0; p < bc.paths; ++p)
                total += table.cell_area(CellType::LVT, bc.strengths[static_cast<std::size_t>(p)]);
            if (bc.paths == 2) total += table.mux_area;
        }
    }
    return total;
}

AreaReport area_report(const StateRegisterConfig& config, const StateRegisterConfig& baseline,
                       const LeakageTable& table) {
    AreaReport r;
    r.absolute = config_area(config, table);
    r.overhead = r.absolute / config_area(baseline, table);
    return r;
}

std::string to_text(const StateRegisterConfig& config) {
    std::ostringstream out;
    out << "spsclab-design v1\n";
    out << "label: " << config.label << "\n";
    out << "bits:\n";
    for (int byte = 0; byte < 16; ++byte)
        for (int b = 0; b < 8; ++b) {
            const BitCell& bc = config.bit(byte, b);
            out << byte << " " << b << " ";
            if (bc.kind == BitCell::Kind::Plain) {
                out << "plain " << cell_name(bc.cell) << " " << strength_name(bc.strengths[0]);
            } else {
                out << "prim LVT";
                for (int p = 0; p < bc.paths; ++p) out << " " << strength_name(bc.strengths[static_cast<std::size_t>(p)]);
            }
            out << "\n";
        }
    return out.str();
}

StateRegisterConfig config_from_text(std::string_view text) {
    StateRegisterConfig cfg;
    std::array<bool, 128> seen{};
    bool header_ok = false;
    bool in_bits = false;

    int lineno = 0;
    for (std::string_view raw : split_lines(text)) {
        ++lineno;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!header_ok) {
            if (line != "spsclab-design v1")
                throw SchemaError("expected 'spsclab-design v1' header");
            header_ok = true;
            continue;
        }
        if (line.starts_with("label:")) {
            cfg.label = std::string(trim(line.substr(6)));
            continue;
        }
        if (line == "bits:") {
            in_bits = true;
            continue;
        }
        if (!in_bits)
            throw SchemaError("unexpected line " + std::to_string(lineno) + " before 'bits:'");

        const auto tok = split_ws(line);
        if (tok.size() < 4) throw SchemaError("malformed bit record at line " + std::to_string(lineno));
        const auto byte = parse_i64(tok[0]);
        const auto bitn = parse_i64(tok[1]);
        if (!byte || !bitn || *byte < 0 || *byte > 15 || *bitn < 0 || *bitn > 7)
            throw SchemaError("bit position out of range at line " + std::to_string(lineno));

        BitCell bc;
        if (tok[2] == "plain") {
            if (tok.size() != 5)
                throw SchemaError("plain record needs cell and strength at line " +
                                  std::to_string(lineno));
            bc = BitCell::plain(cell_from_name(tok[3]), strength_from_name(tok[4]));
        } else if (tok[2] == "prim") {
            if (tok[3] != "LVT")
                throw SchemaError("primitive paths must be LVT at line " + std::to_string(lineno));
            if (tok.size() == 5)
                bc = BitCell::primitive(strength_from_name(tok[4]));
            else if (tok.size() == 6)
                bc = BitCell::primitive(strength_from_name(tok[4]), strength_from_name(tok[5]));
            else
                throw SchemaError("primitive record needs 1 or 2 strengths at line " +
                                  std::to_string(lineno));
        } else {
            throw SchemaError("unknown bit kind '" + std::string(tok[2]) + "' at line " +
                              std::to_string(lineno));
        }

        const std::size_t idx = static_cast<std::size_t>(*byte * 8 + *bitn);
        if (seen[idx]) throw SchemaError("duplicate bit record at line " + std::to_string(lineno));
        seen[idx] = true;
        cfg.bits[idx] = bc;
    }

    for (std::size_t i = 0; i < 128; ++i)
        if (!seen[i])
            throw SchemaError("missing bit record for byte " + std::to_string(i / 8) + " bit " +
                              std::to_string(i % 8));
    return cfg;
}

}  // namespace spsc
