#pragma once

#include <array>
#include <cstdint>

namespace dforge {

// Philox 4x32-10 block function. Pure: block(key, counter) is identical on
// every platform, which makes seeded runs replayable byte-for-byte.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key, std::uint64_t counter);

// Streaming wrapper over the counter-based block function. All randomness in
// the project flows through this generator; no OS entropy is ever consulted.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(seed) {}

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform();

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller. Generates pairs; the spare is cached.
    double normal();

    // Uniform integer in [0, n), n > 0. Uses rejection to avoid modulo bias.
    std::uint64_t below(std::uint64_t n);

    std::uint64_t seed() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace dforge
