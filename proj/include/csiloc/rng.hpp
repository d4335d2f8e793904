#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace csiloc {

// All randomness in the library flows through these helpers so that a fixed
// seed reproduces bit-identical results. std::uniform_real_distribution and
// friends are implementation-defined and are deliberately avoided.

inline std::uint64_t splitmix64(std::uint64_t &state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive an independent child seed from a master seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Uniform double in [0, 1).
inline double uniform01(std::mt19937_64 &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_range(std::mt19937_64 &rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n). Modulo bias is ~n/2^64, negligible here.
inline std::size_t uniform_index(std::mt19937_64 &rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
}

/// Standard complex circular Gaussian, unit variance per complex sample
/// (variance 1/2 per real component). Box-Muller on explicit uniforms.
inline std::complex<double> complex_gaussian(std::mt19937_64 &rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    // u1 = 0 would blow up the log; the smallest representable step is fine.
    double r = std::sqrt(-std::log(1.0 - u1));
    double phi = 2.0 * M_PI * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

} // namespace csiloc
