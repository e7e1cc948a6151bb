#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace cbo::rng {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw,
// "Parallel random numbers: as easy as 1, 2, 3", SC'11). Every draw is a
// pure function of (key, counter), so results do not depend on call order
// or thread scheduling. Verified against the Random123 known-answer vectors.

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Block philox4x32(Block ctr, Key key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

// Domain-separation tag: the last counter word holds the purpose so the
// noise process, initial-ensemble draws, scalar Monte Carlo samples, and
// metadata search points never share a counter.
enum class Purpose : std::uint32_t {
    dynamics_noise = 0,
    initial_uniform = 1,
    ball_direction = 2,
    ball_radius = 3,
    scalar_sample = 4,
    search_point = 5,
};

inline Block block(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                   std::uint32_t c, Purpose purpose) {
    const Key key{static_cast<std::uint32_t>(seed),
                  static_cast<std::uint32_t>(seed >> 32)};
    return philox4x32({a, b, c, static_cast<std::uint32_t>(purpose)}, key);
}

inline std::uint64_t join64(std::uint32_t hi, std::uint32_t lo) {
    return (std::uint64_t(hi) << 32) | lo;
}

/// 53-bit uniform in [0, 1).
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// 53-bit uniform in (0, 1]; safe as a log() argument.
inline double to_unit_open(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                      std::uint32_t c, Purpose purpose) {
    const Block r = block(seed, a, b, c, purpose);
    return to_unit(join64(r[0], r[1]));
}

/// Standard normal via Box-Muller; one counter block feeds both uniforms.
inline double normal(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                     std::uint32_t c, Purpose purpose) {
    const Block r = block(seed, a, b, c, purpose);
    const double u1 = to_unit_open(join64(r[0], r[1]));
    const double u2 = to_unit(join64(r[2], r[3]));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace cbo::rng
