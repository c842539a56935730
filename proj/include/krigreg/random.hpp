#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace krigreg {

// All randomness in the library flows through these helpers on top of
// std::mt19937_64.  The engine's output sequence is fixed by the standard,
// and the double extraction below avoids std::uniform_real_distribution,
// whose results are implementation-defined; together this makes every
// seeded draw bit-reproducible across platforms.

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random mantissa bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
    return lo + uniform01(rng) * (hi - lo);
}

// Log-uniform double in [lo, hi), lo > 0.
inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

// Uniform integer in [0, n) via truncation; adequate for small n.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
    return i < n ? i : n - 1;
}

}  // namespace krigreg
