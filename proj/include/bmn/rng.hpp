#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace bmn {

using Rng = std::mt19937_64;

// Stable sub-seed derivation so one master seed can drive several
// independent streams (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline int draw_categorical(Rng& rng, std::span<const double> probs) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cum = 0.0;
  int last = 0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] <= 0.0) continue;
    last = static_cast<int>(j);
    cum += probs[j];
    if (u < cum) return last;
  }
  return last;  // u fell in the rounding tail of the CDF
}

// Symmetric Dirichlet with unit concentration: uniform on the simplex.
inline void draw_dirichlet_uniform(Rng& rng, std::span<double> out) {
  std::exponential_distribution<double> expo(1.0);
  double sum = 0.0;
  for (double& v : out) {
    do {
      v = expo(rng);
    } while (v <= 0.0);
    sum += v;
  }
  for (double& v : out) v /= sum;
}

}  // namespace bmn
