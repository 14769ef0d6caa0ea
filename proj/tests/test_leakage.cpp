#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "spsc/leakage.hpp"
#include "spsc/textio.hpp"

using namespace spsc;

TEST_CASE("default table matches the characterization data") {
    const LeakageTable t = default_table();

    CHECK(t.value(CellType::LVT, {0, 0, 0}) == 112.8);
    CHECK(t.value(CellType::RVT, {1, 1, 1}) == 7.1);
    CHECK(t.value(CellType::RVT, {0, 1, 0}) == 10.1);
    CHECK(t.value(CellType::LVT, {1, 0, 0}) == 138.1);
    for (int clk = 0; clk <= 1; ++clk)
        for (int d = 0; d <= 1; ++d)
            for (int q = 0; q <= 1; ++q)
                CHECK(t.value(CellType::HVT, {static_cast<std::uint8_t>(clk),
                                              static_cast<std::uint8_t>(d),
                                              static_cast<std::uint8_t>(q)}) == 1.0);
    CHECK_NOTHROW(t.validate());
}

TEST_CASE("ff_leakage scales linearly with drive strength") {
    const LeakageTable t = default_table();
    CHECK(ff_leakage(t, CellType::LVT, DriveStrength::X2, {0, 0, 0}) == 112.8);
    CHECK(ff_leakage(t, CellType::LVT, DriveStrength::X4, {0, 0, 0}) == doctest::Approx(225.6));
    CHECK(ff_leakage(t, CellType::HVT, DriveStrength::X2, {1, 0, 1}) == 1.0);

    // Monotone in the multiplier for every (cell, pin state).
    for (CellType c : kCellTypes)
        for (int p = 0; p < 8; ++p) {
            const PinState pins{static_cast<std::uint8_t>(p >> 2),
                                static_cast<std::uint8_t>((p >> 1) & 1),
                                static_cast<std::uint8_t>(p & 1)};
            const double x2 = ff_leakage(t, c, DriveStrength::X2, pins);
            const double x4 = ff_leakage(t, c, DriveStrength::X4, pins);
            const double x8 = ff_leakage(t, c, DriveStrength::X8, pins);
            CHECK(x2 < x4);
            CHECK(x4 < x8);
        }
}

TEST_CASE("LVT to HVT ratio stays within the characterized range") {
    const LeakageTable t = default_table();
    for (int p = 0; p < 8; ++p) {
        const PinState pins{static_cast<std::uint8_t>(p >> 2),
                            static_cast<std::uint8_t>((p >> 1) & 1),
                            static_cast<std::uint8_t>(p & 1)};
        const double ratio = ff_leakage(t, CellType::LVT, DriveStrength::X2, pins) /
                             ff_leakage(t, CellType::HVT, DriveStrength::X2, pins);
        CHECK(ratio >= 93.5);
        CHECK(ratio <= 138.1);
    }
}

TEST_CASE("leakage depends on D and Q separately") {
    const LeakageTable t = default_table();
    // D flips the value even with Q fixed (rows 000 vs 010)...
    CHECK(t.value(CellType::LVT, {0, 0, 0}) != t.value(CellType::LVT, {0, 1, 0}));
    // ...and Q flips it with D fixed.
    CHECK(t.value(CellType::LVT, {0, 0, 0}) != t.value(CellType::LVT, {0, 0, 1}));
}

TEST_CASE("serialization round-trips") {
    const LeakageTable t = default_table();
    const LeakageTable back = load_table(to_text(t));
    CHECK(back == t);
}

TEST_CASE("the shipped library file equals the built-in table") {
    const std::string text = read_file(std::string(SPSCLAB_SOURCE_DIR) + "/data/cell_library.txt");
    CHECK(load_table(text) == default_table());
    CHECK(to_text(default_table()) == text);
}

TEST_CASE("schema errors name the offending entry") {
    std::string text = to_text(default_table());

    SUBCASE("missing entry") {
        const auto pos = text.find("LVT.111");
        text.replace(pos, 7, "# gone ");
        CHECK_THROWS_WITH_AS(load_table(text), doctest::Contains("LVT.111"), SchemaError);
    }
    SUBCASE("non-numeric value") {
        const auto pos = text.find("RVT.010 = 10.1");
        text.replace(pos, 14, "RVT.010 = blue");
        CHECK_THROWS_WITH_AS(load_table(text), doctest::Contains("RVT.010"), SchemaError);
    }
    SUBCASE("ordering violation") {
        // HVT raised above LVT for pin state 011.
        const auto pos = text.find("HVT.011 = 1");
        text.replace(pos, 11, "HVT.011 = 500");
        CHECK_THROWS_WITH_AS(load_table(text), doctest::Contains("011"), SchemaError);
    }
    SUBCASE("unknown entry") {
        text += "\n[leakage]\nXVT.000 = 1\n";
        CHECK_THROWS_AS(load_table(text), SchemaError);
    }
}

TEST_CASE("area and mux sections are optional") {
    std::string text = to_text(default_table());
    const auto pos = text.find("[area]");
    text.resize(pos);
    const LeakageTable t = load_table(text);
    CHECK(t.cell_area(CellType::LVT, DriveStrength::X2) == 1.0);
    CHECK(t.mux_area == 0.35);
    CHECK(t.mux_leakage == 0.5);
}
