#pragma once

#include <cmath>
#include <cstdint>

#include "conbandit/model.hpp"

namespace conbandit {

// Counter-based generator: every draw is a pure hash of (seed, stream, index),
// so reward streams are per-arm and independent of the order arms are pulled.
// That keeps runs bit-reproducible and reduces cross-sampler variance.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

// Uniform in (0, 1), never exactly 0 or 1.
inline double toUnit(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index) {
  return toUnit(hash3(seed, stream, index));
}

// Standard normal via Box-Muller on two hashed uniforms.
inline double normal(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index) {
  const double u1 = toUnit(hash3(seed, stream, 2 * index));
  const double u2 = toUnit(hash3(seed, stream, 2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Reward for the pull_index-th pull of `arm` (Gaussian mean+sigma*z, or
// Bernoulli coin flip). Stream ids: arm a uses stream a.
inline double reward(const BanditInstance& instance, std::uint64_t seed,
                     int arm, std::uint64_t pull_index) {
  if (instance.family.kind == FamilyKind::Gaussian) {
    return instance.means[arm] +
           instance.family.sigma *
               normal(seed, static_cast<std::uint64_t>(arm), pull_index);
  }
  return uniform(seed, static_cast<std::uint64_t>(arm), pull_index) <
                 instance.means[arm]
             ? 1.0
             : 0.0;
}

// Gaussian reward with an environment sigma different from the model's
// (used by scenarios where the model intentionally mis-specifies sigma).
inline double rewardWithSigma(const BanditInstance& instance, double env_sigma,
                              std::uint64_t seed, int arm,
                              std::uint64_t pull_index) {
  return instance.means[arm] +
         env_sigma * normal(seed, static_cast<std::uint64_t>(arm), pull_index);
}

// Auxiliary uniform draw for sampler-internal choices (e.g. sampling an arm
// from an allocation); stream ids >= 1<<32 avoid colliding with arm streams.
inline double choice(std::uint64_t seed, std::uint64_t t) {
  return uniform(seed, (1ULL << 32) + 1, t);
}

}  // namespace rng
}  // namespace conbandit
