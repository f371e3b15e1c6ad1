#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sonn {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for a sub-stream identified by a path of integers, e.g. {seed, fold, run}.
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC909ull;
    for (std::uint64_t v : path) h = mix_seed(h ^ mix_seed(v));
    return h;
}

/// Uniform in [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementation.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace sonn
