#pragma once

#include <cstdint>
#include <random>

// Portable, seedable randomness. std::mt19937_64's raw output is pinned by
// the standard; the double conversions below avoid std distributions, whose
// results vary across standard libraries. Streams are split per purpose by
// mixing the user seed with a fixed tag through splitmix64.

namespace ssmlab::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream tags. Data generation uses one stream per data kind.
inline constexpr std::uint64_t kStreamNoise = 0x6E6F697365ULL;       // "noise"
inline constexpr std::uint64_t kStreamInit = 0x696E6974ULL;          // "init"
inline constexpr std::uint64_t kStreamTest = 0x74657374ULL;          // "test"

inline std::mt19937_64 engine(std::uint64_t seed, std::uint64_t stream_tag) {
    return std::mt19937_64(splitmix64(seed ^ stream_tag));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

/// Standard normal via Box-Muller (one value per call; deterministic stream).
inline double gaussian(std::mt19937_64& g) {
    double u1 = uniform01(g);
    while (u1 <= 0.0) u1 = uniform01(g);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace ssmlab::rng
