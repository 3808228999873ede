#pragma once

// Counter-based pseudo-random numbers for the simulator.
//
// Every variate is a pure function of (seed, stream, counter), so simulation
// noise is reproducible regardless of evaluation order, and the stream of one
// individual never shifts when more individuals are added to a scenario.
//
// The mixer is the SplitMix64 finalizer (increment 0x9E3779B97F4A7C15,
// multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). Stream, counter and
// lane are folded in with distinct odd constants before remixing. Gaussians
// come from Box-Muller on two 53-bit uniforms.

#include "swarmnet/core.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

namespace swarmnet::rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Independent 64-bit word for a (seed, stream, counter, lane) tuple.
inline std::uint64_t word(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter, std::uint64_t lane) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (stream + 0xA0761D6478BD642Full));
  h = mix64(h ^ (counter + 0xE7037ED1A0B428DBull));
  h = mix64(h ^ (lane + 0x8EBC6AF09C88C6E3ull));
  return h;
}

/// Uniform in (0, 1]: 53 high bits, shifted into the open-at-zero interval.
inline double unit_open(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Uniform in [0, 1).
inline double unit_half_open(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Standard-normal pair for one (stream, counter) cell via Box-Muller:
/// r = sqrt(-2 ln u1), angle = 2 pi u2.
inline Vec2 gaussian_pair(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter) {
  const double u1 = unit_open(word(seed, stream, counter, 0));
  const double u2 = unit_half_open(word(seed, stream, counter, 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return Vec2(r * std::cos(a), r * std::sin(a));
}

}  // namespace swarmnet::rng
