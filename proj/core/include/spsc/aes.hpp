#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace spsc {

// 128-bit block in serialized order: bytes[j] is the j-th byte of the block
// as transmitted. With the standard AES column-major state layout this means
// state(row r, column c) = bytes[4*c + r]. Every module in the project uses
// this one indexing convention.
struct Block {
    std::array<std::uint8_t, 16> bytes{};

    std::uint8_t& operator[](std::size_t i) { return bytes[i]; }
    std::uint8_t operator[](std::size_t i) const { return bytes[i]; }
    std::uint8_t* data() { return bytes.data(); }
    const std::uint8_t* data() const { return bytes.data(); }
    static constexpr std::size_t size() { return 16; }

    friend bool operator==(const Block&, const Block&) = default;
};

// Final-round view of one encryption: the state entering round 10 (after
// round 9's AddRoundKey) and the resulting ciphertext.
struct RoundTrace {
    Block pre_final_state;
    Block ciphertext;
};

using RoundKeys = std::array<Block, 11>;

std::uint8_t sbox(std::uint8_t x);
std::uint8_t inv_sbox(std::uint8_t x);

// AES-128 key expansion; round key 0 is the cipher key itself.
RoundKeys key_schedule(const Block& key);

// Full AES-128 encryption, also exposing the pre-final-round state.
RoundTrace encrypt(const Block& key, const Block& plaintext);

// Final round (SubBytes, ShiftRows, AddRoundKey - no MixColumns) and its
// inverse, given the round-10 key.
Block final_round(const Block& pre_final_state, const Block& round_key_10);
Block invert_final_round(const Block& ciphertext, const Block& round_key_10);

// Reverses the key schedule: recovers the cipher key from the round-10 key.
Block cipher_key_from_last_round(const Block& round_key_10);

// Pre-ShiftRows position of the byte that lands at ciphertext position j.
// Throws std::out_of_range for j outside 0..15.
int shift_rows_origin(int j);

inline int hw(std::uint8_t x) { return std::popcount(x); }
inline int hd(std::uint8_t a, std::uint8_t b) {
    return std::popcount(static_cast<std::uint8_t>(a ^ b));
}

// Hex helpers for 16-byte blocks ("000102...0f", case-insensitive).
Block block_from_hex(std::string_view hex);
std::string to_hex(const Block& b);

}  // namespace spsc
