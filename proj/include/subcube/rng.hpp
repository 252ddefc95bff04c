#pragma once

#include <cstdint>
#include <random>

#include <boost/random/binomial_distribution.hpp>

namespace subcube {

// std::mt19937_64 is fully specified by the standard; the helpers below avoid
// the implementation-defined std:: distributions so seeded runs replay
// identically across standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Uniform on {0, ..., count-1}.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t count) {
  const auto k = static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(count));
  return k < count ? k : count - 1;
}

inline std::uint64_t binomial(Rng& rng, std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  boost::random::binomial_distribution<std::int64_t, double> dist(static_cast<std::int64_t>(trials),
                                                                  p);
  return static_cast<std::uint64_t>(dist(rng));
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed for repetition `index` of an experiment seeded with `master`.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

}  // namespace subcube
