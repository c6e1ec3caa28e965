#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace adaptd {

/// Engine used everywhere a random draw is made. Every stochastic routine
/// takes either an explicit engine or a seed; there is no hidden global state.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based child seed: the i-th stream of `seed`. Streams for distinct
/// (seed, index) pairs are decorrelated, so work split across threads draws
/// the same numbers as a serial loop.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t sub) noexcept;

/// Stable 64-bit FNV-1a hash, used to turn names into stream ids.
std::uint64_t stable_hash(std::string_view text) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

/// Uniform double in [0, 1) with 53 random bits. Unlike
/// std::uniform_real_distribution this is bit-identical across standard
/// library implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n) by rejection. n must be positive.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal draw (Marsaglia polar method).
double standard_normal(Rng& rng);

}  // namespace adaptd
