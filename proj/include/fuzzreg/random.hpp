#pragma once

#include <cstdint>
#include <limits>
#include <random>

// Seeded randomness helpers. The mt19937_64 output sequence is fixed by the
// standard; the uniform draws below are hand-rolled so results never depend
// on the standard library's distribution implementations.

namespace fuzzreg::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic per-cell seed derived from a base seed and two indices.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = splitmix64(base);
    s = splitmix64(s ^ splitmix64(a + 0x633d5d93a2d64d13ULL));
    s = splitmix64(s ^ splitmix64(b + 0x106689d45497fdb5ULL));
    return s;
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double unit_double(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform integer in [0, n).
inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t x = gen();
    while (x < threshold) {
        x = gen();
    }
    return x % n;
}

} // namespace fuzzreg::rng
