#pragma once

#include <cstdint>
#include <random>

namespace mmboot {

using Rng = std::mt19937_64;

/// Purpose tags for keyed random substreams. Every random quantity in the
/// library is drawn from a stream keyed by (master seed, purpose, indices),
/// so results never depend on the order in which replicates are executed.
enum class Stream : std::uint64_t {
  single_bootstrap = 1,
  outer_bootstrap = 2,
  inner_bootstrap = 3,
  study_design = 4,
  study_data = 5,
  study_bootstrap = 6,
  sampler = 7,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// seed = mix(mix(mix(mix(master) ^ purpose) ^ a) ^ b), with distinct odd
/// multipliers folded in at each level so (a, b) and (b, a) never collide.
std::uint64_t derive_seed(std::uint64_t master, Stream purpose, std::uint64_t a = 0,
                          std::uint64_t b = 0) noexcept;

inline Rng make_stream(std::uint64_t master, Stream purpose, std::uint64_t a = 0,
                       std::uint64_t b = 0) {
  return Rng(derive_seed(master, purpose, a, b));
}

/// Uniform on [0, 1) with 53 random bits; independent of the standard
/// library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Seed drawn from system entropy (used when the caller supplies none).
std::uint64_t entropy_seed();

}  // namespace mmboot
