#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "spsc/aes.hpp"
#include "spsc/rng.hpp"
#include "support/aes_reference.hpp"

using namespace spsc;

namespace {

Block random_block(Rng& rng) {
    Block b;
    for (auto& x : b.bytes) x = rng.next_byte();
    return b;
}

}  // namespace

TEST_CASE("FIPS-197 C.1 vector") {
    const Block key = block_from_hex("000102030405060708090a0b0c0d0e0f");
    const Block pt = block_from_hex("00112233445566778899aabbccddeeff");
    const RoundTrace rt = encrypt(key, pt);
    CHECK(to_hex(rt.ciphertext) == "69c4e0d86a7b0430d8cdb78070b4c55a");
}

TEST_CASE("key schedule against frozen vectors and the reference oracle") {
    // Round key 0 is the cipher key itself.
    const Block key = block_from_hex("000102030405060708090a0b0c0d0e0f");
    const RoundKeys rk = key_schedule(key);
    CHECK(rk[0] == key);

    // All-zero key: first word of round key 1 is 62 63 63 63.
    const RoundKeys zero = key_schedule(Block{});
    CHECK(zero[1][0] == 0x62);
    CHECK(zero[1][1] == 0x63);
    CHECK(zero[1][2] == 0x63);
    CHECK(zero[1][3] == 0x63);

    // Last round keys, frozen from the independent reference implementation.
    CHECK(to_hex(rk[10]) == "13111d7fe3944a17f307a78b4d2b30c5");
    const RoundKeys fips_b = key_schedule(block_from_hex("2b7e151628aed2a6abf7158809cf4f3c"));
    CHECK(to_hex(fips_b[10]) == "d014f9a8c9ee2589e13f0cc8b6630ca6");

    // Cross-check every round key against the oracle for a few keys.
    Rng rng(42);
    for (int trial = 0; trial < 8; ++trial) {
        const Block k = random_block(rng);
        const auto oracle = aesref::expand_key(k.bytes);
        const RoundKeys mine = key_schedule(k);
        for (int r = 0; r < 11; ++r) CHECK(mine[static_cast<std::size_t>(r)].bytes == oracle[static_cast<std::size_t>(r)]);
    }
}

TEST_CASE("1000 random encryptions agree with the reference implementation") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const Block key = random_block(rng);
        const Block pt = random_block(rng);
        const RoundTrace rt = encrypt(key, pt);
        CHECK(rt.ciphertext.bytes == aesref::encrypt(key.bytes, pt.bytes));
        // RoundTrace invariant: the final round reproduces the ciphertext.
        CHECK(final_round(rt.pre_final_state, key_schedule(key)[10]) == rt.ciphertext);
    }
}

TEST_CASE("encrypt is pure") {
    const Block key = block_from_hex("2b7e151628aed2a6abf7158809cf4f3c");
    const Block pt = block_from_hex("3243f6a8885a308d313198a2e0370734");
    const RoundTrace a = encrypt(key, pt);
    const RoundTrace b = encrypt(key, pt);
    CHECK(a.ciphertext == b.ciphertext);
    CHECK(a.pre_final_state == b.pre_final_state);
}

TEST_CASE("final round inversion") {
    Rng rng(11);
    const Block key = random_block(rng);
    const Block k10 = key_schedule(key)[10];
    for (int i = 0; i < 100; ++i) {
        const Block pre = random_block(rng);
        CHECK(invert_final_round(final_round(pre, k10), k10) == pre);
    }
}

TEST_CASE("cipher key recovery from the last round key") {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        const Block key = random_block(rng);
        CHECK(cipher_key_from_last_round(key_schedule(key)[10]) == key);
    }
}

TEST_CASE("sbox properties") {
    CHECK(sbox(0x00) == 0x63);
    CHECK(inv_sbox(sbox(0xA7)) == 0xA7);
    std::set<std::uint8_t> outputs;
    for (int x = 0; x < 256; ++x) {
        const std::uint8_t y = sbox(static_cast<std::uint8_t>(x));
        outputs.insert(y);
        CHECK(inv_sbox(y) == x);
        // Against the algebraic construction.
        CHECK(y == aesref::sbox(static_cast<std::uint8_t>(x)));
    }
    CHECK(outputs.size() == 256);
}

TEST_CASE("shift_rows_origin") {
    CHECK(shift_rows_origin(0) == 0);
    // Row 0 is unshifted.
    for (int j : {0, 4, 8, 12}) CHECK(shift_rows_origin(j) == j);

    std::set<int> seen;
    for (int j = 0; j < 16; ++j) seen.insert(shift_rows_origin(j));
    CHECK(seen.size() == 16);

    // Composing with the forward ShiftRows destination map is the identity.
    auto dest = [](int m) {
        const int r = m % 4;
        const int c = m / 4;
        return 4 * (((c - r) % 4 + 4) % 4) + r;
    };
    for (int j = 0; j < 16; ++j) CHECK(dest(shift_rows_origin(j)) == j);

    CHECK_THROWS_AS(shift_rows_origin(-1), std::out_of_range);
    CHECK_THROWS_AS(shift_rows_origin(16), std::out_of_range);
}

TEST_CASE("hw and hd") {
    CHECK(hw(0x00) == 0);
    CHECK(hw(0xFF) == 8);
    CHECK(hd(0xF0, 0x0F) == 8);
    for (int a = 0; a < 256; ++a)
        for (int b = 0; b < 256; ++b)
            CHECK(hd(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)) ==
                  hw(static_cast<std::uint8_t>(a ^ b)));
}

TEST_CASE("hex round trip") {
    const Block b = block_from_hex("00FFa05b112233445566778899aabbcc");
    CHECK(to_hex(b) == "00ffa05b112233445566778899aabbcc");
    CHECK_THROWS(block_from_hex("0011"));
    CHECK_THROWS(block_from_hex("zz112233445566778899aabbccddeeff"));
}
