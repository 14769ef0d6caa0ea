#include "spsc/aes.hpp"

#include <stdexcept>

namespace spsc {

namespace {

constexpr std::uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b,
    0xfe, 0xd7, 0xab, 0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0,
    0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26,
    0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0,
    0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed,
    0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f,
    0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec,
    0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14,
    0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c,
    0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f,
    0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e,
    0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1, 0xf8, 0x98, 0x11,
    0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f,
    0xb0, 0x54, 0xbb, 0x16};

constexpr std::uint8_t kInvSbox[256] = {
    0x52, 0x09, 0x6a, 0xd5, 0x30, 0x36, 0xa5, 0x38, 0xbf, 0x40, 0xa3, 0x9e,
    0x81, 0xf3, 0xd7, 0xfb, 0x7c, 0xe3, 0x39, 0x82, 0x9b, 0x2f, 0xff, 0x87,
    0x34, 0x8e, 0x43, 0x44, 0xc4, 0xde, 0xe9, 0xcb, 0x54, 0x7b, 0x94, 0x32,
    0xa6, 0xc2, 0x23, 0x3d, 0xee, 0x4c, 0x95, 0x0b, 0x42, 0xfa, 0xc3, 0x4e,
    0x08, 0x2e, 0xa1, 0x66, 0x28, 0xd9, 0x24, 0xb2, 0x76, 0x5b, 0xa2, 0x49,
    0x6d, 0x8b, 0xd1, 0x25, 0x72, 0xf8, 0xf6, 0x64, 0x86, 0x68, 0x98, 0x16,
    0xd4, 0xa4, 0x5c, 0xcc, 0x5d, 0x65, 0xb6, 0x92, 0x6c, 0x70, 0x48, 0x50,
    0xfd, 0xed, 0xb9, 0xda, 0x5e, 0x15, 0x46, 0x57, 0xa7, 0x8d, 0x9d, 0x84,
    0x90, 0xd8, 0xab, 0x00, 0x8c, 0xbc, 0xd3, 0x0a, 0xf7, 0xe4, 0x58, 0x05,
    0xb8, 0xb3, 0x45, 0x06, 0xd0, 0x2c, 0x1e, 0x8f, 0xca, 0x3f, 0x0f, 0x02,
    0xc1, 0xaf, 0xbd, 0x03, 0x01, 0x13, 0x8a, 0x6b, 0x3a, 0x91, 0x11, 0x41,
    0x4f, 0x67, 0xdc, 0xea, 0x97, 0xf2, 0xcf, 0xce, 0xf0, 0xb4, 0xe6, 0x73,
    0x96, 0xac, 0x74, 0x22, 0xe7, 0xad, 0x35, 0x85, 0xe2, 0xf9, 0x37, 0xe8,
    0x1c, 0x75, 0xdf, 0x6e, 0x47, 0xf1, 0x1a, 0x71, 0x1d, 0x29, 0xc5, 0x89,
    0x6f, 0xb7, 0x62, 0x0e, 0xaa, 0x18, 0xbe, 0x1b, 0xfc, 0x56, 0x3e, 0x4b,
    0xc6, 0xd2, 0x79, 0x20, 0x9a, 0xdb, 0xc0, 0xfe, 0x78, 0xcd, 0x5a, 0xf4,
    0x1f, 0xdd, 0xa8, 0x33, 0x88, 0x07, 0xc7, 0x31, 0xb1, 0x12, 0x10, 0x59,
    0x27, 0x80, 0xec, 0x5f, 0x60, 0x51, 0x7f, 0xa9, 0x19, 0xb5, 0x4a, 0x0d,
    0x2d, 0xe5, 0x7a, 0x9f, 0x93, 0xc9, 0x9c, 0xef, 0xa0, 0xe0, 0x3b, 0x4d,
    0xae, 0x2a, 0xf5, 0xb0, 0xc8, 0xeb, 0xbb, 0x3c, 0x83, 0x53, 0x99, 0x61,
    0x17, 0x2b, 0x04, 0x7e, 0xba, 0x77, 0xd6, 0x26, 0xe1, 0x69, 0x14, 0x63,
    0x55, 0x21, 0x0c, 0x7d};

constexpr std::uint8_t kRcon[11] = {0x00, 0x01, 0x02, 0x04, 0x08, 0x10,
                                    0x20, 0x40, 0x80, 0x1b, 0x36};

inline std::uint8_t xtime(std::uint8_t x) {
    return static_cast<std::uint8_t>((x << 1) ^ ((x >> 7) * 0x1b));
}

void sub_bytes(Block& s) {
    for (auto& b : s.bytes) b = kSbox[b];
}

void shift_rows(Block& s) {
    Block t = s;
    for (int j = 0; j < 16; ++j) {
        const int r = j % 4;
        const int c = j / 4;
        s[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(4 * ((c + r) % 4) + r)];
    }
}

void inv_shift_rows(Block& s) {
    Block t = s;
    for (int j = 0; j < 16; ++j) {
        const int r = j % 4;
        const int c = j / 4;
        s[static_cast<std::size_t>(4 * ((c + r) % 4) + r)] = t[static_cast<std::size_t>(j)];
    }
}

void mix_columns(Block& s) {
    for (int c = 0; c < 4; ++c) {
        std::uint8_t* col = s.data() + 4 * c;
        const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        const std::uint8_t all = static_cast<std::uint8_t>(a0 ^ a1 ^ a2 ^ a3);
        col[0] = static_cast<std::uint8_t>(a0 ^ all ^ xtime(static_cast<std::uint8_t>(a0 ^ a1)));
        col[1] = static_cast<std::uint8_t>(a1 ^ all ^ xtime(static_cast<std::uint8_t>(a1 ^ a2)));
        col[2] = static_cast<std::uint8_t>(a2 ^ all ^ xtime(static_cast<std::uint8_t>(a2 ^ a3)));
        col[3] = static_cast<std::uint8_t>(a3 ^ all ^ xtime(static_cast<std::uint8_t>(a3 ^ a0)));
    }
}

void add_round_key(Block& s, const Block& rk) {
    for (std::size_t i = 0; i < 16; ++i) s[i] = static_cast<std::uint8_t>(s[i] ^ rk[i]);
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument(std::string("invalid hex character '") + c + "'");
}

}  // namespace

std::uint8_t sbox(std::uint8_t x) { return kSbox[x]; }
std::uint8_t inv_sbox(std::uint8_t x) { return kInvSbox[x]; }

RoundKeys key_schedule(const Block& key) {
    RoundKeys rk;
    rk[0] = key;
    for (int round = 1; round <= 10; ++round) {
        const Block& prev = rk[static_cast<std::size_t>(round - 1)];
        Block& cur = rk[static_cast<std::size_t>(round)];
        // First word: w0' = w0 ^ SubWord(RotWord(w3)) ^ rcon.
        std::uint8_t t[4] = {kSbox[prev[13]], kSbox[prev[14]], kSbox[prev[15]], kSbox[prev[12]]};
        t[0] = static_cast<std::uint8_t>(t[0] ^ kRcon[round]);
        for (int i = 0; i < 4; ++i)
            cur[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(prev[static_cast<std::size_t>(i)] ^ t[i]);
        for (int i = 4; i < 16; ++i)
            cur[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(cur[static_cast<std::size_t>(i - 4)] ^ prev[static_cast<std::size_t>(i)]);
    }
    return rk;
}

RoundTrace encrypt(const Block& key, const Block& plaintext) {
    const RoundKeys rk = key_schedule(key);
    Block s = plaintext;
    add_round_key(s, rk[0]);
    for (int round = 1; round <= 9; ++round) {
        sub_bytes(s);
        shift_rows(s);
        mix_columns(s);
        add_round_key(s, rk[static_cast<std::size_t>(round)]);
    }
    RoundTrace rt;
    rt.pre_final_state = s;
    rt.ciphertext = final_round(s, rk[10]);
    return rt;
}

Block final_round(const Block& pre_final_state, const Block& round_key_10) {
    Block s = pre_final_state;
    sub_bytes(s);
    shift_rows(s);
    add_round_key(s, round_key_10);
    return s;
}

Block invert_final_round(const Block& ciphertext, const Block& round_key_10) {
    Block s = ciphertext;
    add_round_key(s, round_key_10);
    inv_shift_rows(s);
    for (auto& b : s.bytes) b = kInvSbox[b];
    return s;
}

Block cipher_key_from_last_round(const Block& round_key_10) {
    Block cur = round_key_10;
    for (int round = 10; round >= 1; --round) {
        Block prev;
        // Words 1..3 of the previous key: w_i = w'_i ^ w'_{i-1}.
        for (int i = 15; i >= 4; --i)
            prev[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(cur[static_cast<std::size_t>(i)] ^ cur[static_cast<std::size_t>(i - 4)]);
        std::uint8_t t[4] = {kSbox[prev[13]], kSbox[prev[14]], kSbox[prev[15]], kSbox[prev[12]]};
        t[0] = static_cast<std::uint8_t>(t[0] ^ kRcon[round]);
        for (int i = 0; i < 4; ++i)
            prev[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(cur[static_cast<std::size_t>(i)] ^ t[i]);
        cur = prev;
    }
    return cur;
}

int shift_rows_origin(int j) {
    if (j < 0 || j > 15) throw std::out_of_range("shift_rows_origin: byte index out of range");
    const int r = j % 4;
    const int c = j / 4;
    return 4 * ((c + r) % 4) + r;
}

Block block_from_hex(std::string_view hex) {
    if (hex.size() != 32)
        throw std::invalid_argument("block_from_hex: expected 32 hex characters");
    Block b;
    for (std::size_t i = 0; i < 16; ++i)
        b[i] = static_cast<std::uint8_t>(hex_nibble(hex[2 * i]) * 16 + hex_nibble(hex[2 * i + 1]));
    return b;
}

std::string to_hex(const Block& b) {
    static const char* digits = "0123456789abcdef";
    std::string s(32, '0');
    for (std::size_t i = 0; i < 16; ++i) {
        s[2 * i] = digits[b[i] >> 4];
        s[2 * i + 1] = digits[b[i] & 0xf];
    }
    return s;
}

}  // namespace spsc
