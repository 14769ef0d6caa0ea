#include "spsc/leakage.hpp"

#include <map>
#include <sstream>

#include "spsc/textio.hpp"

namespace spsc {

namespace {

std::string pin_key(int idx) {
    std::string k = "000";
    k[0] = static_cast<char>('0' + ((idx >> 2) & 1));
    k[1] = static_cast<char>('0' + ((idx >> 1) & 1));
    k[2] = static_cast<char>('0' + (idx & 1));
    return k;
}

}  // namespace

std::string_view cell_name(CellType c) {
    switch (c) {
        case CellType::LVT: return "LVT";
        case CellType::RVT: return "RVT";
        case CellType::HVT: return "HVT";
    }
    throw std::logic_error("cell_name: bad enum");
}

std::string_view strength_name(DriveStrength s) {
    switch (s) {
        case DriveStrength::X2: return "X2";
        case DriveStrength::X4: return "X4";
        case DriveStrength::X8: return "X8";
    }
    throw std::logic_error("strength_name: bad enum");
}

CellType cell_from_name(std::string_view name) {
    for (CellType c : kCellTypes)
        if (name == cell_name(c)) return c;
    throw SchemaError("unknown cell type '" + std::string(name) + "'");
}

DriveStrength strength_from_name(std::string_view name) {
    for (DriveStrength s : kDriveStrengths)
        if (name == strength_name(s)) return s;
    throw SchemaError("unknown drive strength '" + std::string(name) + "'");
}

void LeakageTable::validate() const {
    for (int p = 0; p < 8; ++p) {
        for (CellType c : kCellTypes) {
            const double v = leakage[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
            if (!(v >= 0.0))
                throw SchemaError("leakage." + std::string(cell_name(c)) + "." + pin_key(p) +
                                  " must be nonnegative");
        }
        const double lvt = leakage[0][static_cast<std::size_t>(p)];
        const double rvt = leakage[1][static_cast<std::size_t>(p)];
        const double hvt = leakage[2][static_cast<std::size_t>(p)];
        if (!(lvt > rvt && rvt > hvt))
            throw SchemaError("leakage ordering LVT > RVT > HVT violated for pin state " +
                              pin_key(p));
    }
    for (CellType c : kCellTypes)
        for (DriveStrength s : kDriveStrengths) {
            const double a = cell_area(c, s);
            if (!(a > 0.0))
                throw SchemaError("area." + std::string(cell_name(c)) + "." +
                                  std::string(strength_name(s)) + " must be positive");
        }
    if (!(mux_leakage >= 0.0)) throw SchemaError("mux.leakage must be nonnegative");
    if (!(mux_area > 0.0)) throw SchemaError("mux.area must be positive");
}

LeakageTable default_table() {
    LeakageTable t;
    // Normalized leakage currents for a D-FF, 28nm class, indexed by
    // (CLK, D, Q). HVT is the 1x reference.
    //                     clk d q     LVT     RVT
    const double lvt[8] = {112.8, 136.0, 129.3, 118.3, 138.1, 125.0, 131.5, 93.5};
    const double rvt[8] = {9.0, 10.1, 10.1, 9.2, 10.2, 9.1, 9.7, 7.1};
    for (int p = 0; p < 8; ++p) {
        t.leakage[0][static_cast<std::size_t>(p)] = lvt[p];
        t.leakage[1][static_cast<std::size_t>(p)] = rvt[p];
        t.leakage[2][static_cast<std::size_t>(p)] = 1.0;
    }
    for (std::size_t c = 0; c < 3; ++c)
        for (DriveStrength s : kDriveStrengths)
            t.area[c][static_cast<std::size_t>(s)] = strength_multiplier(s) / 2.0;
    t.mux_leakage = 0.5;
    t.mux_area = 0.35;
    return t;
}

LeakageTable load_table(std::string_view text) {
    std::map<std::string, double, std::less<>> leak, area, mux;
    std::string section;

    int lineno = 0;
    for (std::string_view raw : split_lines(text)) {
        ++lineno;
        std::string_view line = trim(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw SchemaError("malformed section header at line " + std::to_string(lineno));
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section != "leakage" && section != "area" && section != "mux")
                throw SchemaError("unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw SchemaError("expected 'key = value' at line " + std::to_string(lineno));
        const std::string key(trim(line.substr(0, eq)));
        const auto val = parse_double(line.substr(eq + 1));
        if (!val)
            throw SchemaError("non-numeric value for entry '" + section + "." + key + "'");
        if (section == "leakage")
            leak[key] = *val;
        else if (section == "area")
            area[key] = *val;
        else if (section == "mux")
            mux[key] = *val;
        else
            throw SchemaError("entry '" + key + "' outside any section");
    }

    LeakageTable t = default_table();

    for (CellType c : kCellTypes)
        for (int p = 0; p < 8; ++p) {
            const std::string key = std::string(cell_name(c)) + "." + pin_key(p);
            const auto it = leak.find(key);
            if (it == leak.end())
                throw SchemaError("missing leakage entry '" + key + "'");
            t.leakage[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)] = it->second;
            leak.erase(it);
        }
    if (!leak.empty())
        throw SchemaError("unknown leakage entry '" + leak.begin()->first + "'");

    if (!area.empty()) {
        for (CellType c : kCellTypes)
            for (DriveStrength s : kDriveStrengths) {
                const std::string key =
                    std::string(cell_name(c)) + "." + std::string(strength_name(s));
                const auto it = area.find(key);
                if (it == area.end()) throw SchemaError("missing area entry '" + key + "'");
                t.area[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)] = it->second;
                area.erase(it);
            }
        if (!area.empty())
            throw SchemaError("unknown area entry '" + area.begin()->first + "'");
    }

    if (!mux.empty()) {
        for (auto& [key, val] : mux) {
            if (key == "leakage")
                t.mux_leakage = val;
            else if (key == "area")
                t.mux_area = val;
            else
                throw SchemaError("unknown mux entry '" + key + "'");
        }
    }

    t.validate();
    return t;
}

std::string to_text(const LeakageTable& table) {
    std::ostringstream out;
    out << "# spsclab cell library\n";
    out << "# leakage: normalized D-FF leakage current per (cell, clk/d/q), X2 reference\n";
    out << "# area: relative cell area per (cell, drive strength)\n";
    out << "[leakage]\n";
    for (CellType c : kCellTypes)
        for (int p = 0; p < 8; ++p)
            out << cell_name(c) << "." << pin_key(p) << " = "
                << fmt_double(table.leakage[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)])
                << "\n";
    out << "[area]\n";
    for (CellType c : kCellTypes)
        for (DriveStrength s : kDriveStrengths)
            out << cell_name(c) << "." << strength_name(s) << " = "
                << fmt_double(table.cell_area(c, s)) << "\n";
    out << "[mux]\n";
    out << "leakage = " << fmt_double(table.mux_leakage) << "\n";
    out << "area = " << fmt_double(table.mux_area) << "\n";
    return out.str();
}

}  // namespace spsc
