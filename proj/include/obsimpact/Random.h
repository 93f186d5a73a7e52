/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_RANDOM_H_
#define OBSIMPACT_RANDOM_H_

#include <cstdint>
#include <random>

#include "obsimpact/StateVector.h"

namespace obsimpact {

using Rng = std::mt19937_64;

/// Independent purposes that draw from the experiment seed.
enum class RandomStream : std::uint32_t {
  Background = 1,
  ObservationNoise = 2,
  Sketch = 3,
  Lanczos = 4,
  Probe = 5,
};

/// Generator for one purpose, derived from the experiment seed.
inline Rng makeRng(std::uint64_t seed, RandomStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline Vector standardNormal(int n, Rng & rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector z(n);
  for (int k = 0; k < n; ++k) z[k] = dist(rng);
  return z;
}

}  // namespace obsimpact

#endif  // OBSIMPACT_RANDOM_H_
