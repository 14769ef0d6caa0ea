#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace spsc {

// All randomness in the project flows through this header. Streams are
// derived from a master seed with splitmix64 so that independent work units
// (traces, trials, grid cells) get independent substreams and results do not
// depend on scheduling or worker count.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t s0,
                                    std::uint64_t s1 = 0, std::uint64_t s2 = 0) {
    std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc908ULL);
    h = splitmix64(h ^ s0);
    h = splitmix64(h ^ s1);
    h = splitmix64(h ^ s2);
    return h;
}

// Stream tags, one per kind of work unit.
inline constexpr std::uint64_t kStreamTrace = 0x11;
inline constexpr std::uint64_t kStreamTrial = 0x22;
inline constexpr std::uint64_t kStreamDesign = 0x33;
inline constexpr std::uint64_t kStreamDataset = 0x44;
inline constexpr std::uint64_t kStreamPool = 0x55;
inline constexpr std::uint64_t kStreamPlan = 0x66;
inline constexpr std::uint64_t kStreamKey = 0x77;

// mt19937_64 wrapper with pinned draw algorithms. std::*_distribution is
// implementation-defined, so bounded/real/normal draws are spelled out here
// to keep streams byte-for-byte reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    std::uint8_t next_byte() {
        if (byte_pos_ == 0) {
            byte_buf_ = next_u64();
            byte_pos_ = 8;
        }
        std::uint8_t b = static_cast<std::uint8_t>(byte_buf_ & 0xff);
        byte_buf_ >>= 8;
        --byte_pos_;
        return b;
    }

    int bit() { return static_cast<int>(next_u64() >> 63); }

    // Unbiased integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // [0, 1) with 53 random bits.
    double real01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // One-shot Box-Muller; the sine branch is discarded so each call
    // consumes exactly two u64 draws.
    double normal(double sigma) {
        double u1 = real01();
        while (u1 <= 0.0) u1 = real01();
        const double u2 = real01();
        return sigma * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::mt19937_64 gen_;
    std::uint64_t byte_buf_ = 0;
    int byte_pos_ = 0;
};

// Fisher-Yates over the first k slots; after the call, items[0..k) hold a
// uniform k-subset of the input in uniform order.
template <typename T>
void partial_shuffle(std::span<T> items, std::size_t k, Rng& rng) {
    const std::size_t n = items.size();
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(items[i], items[j]);
    }
}

}  // namespace spsc
