/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_TESTS_FIXTURES_H_
#define OBSIMPACT_TESTS_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Eigenvalues>

#include "obsimpact/Experiments.h"
#include "obsimpact/Random.h"

namespace obsimpact::test {

inline double relDiff(const Vector & a, const Vector & b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline double relDiff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Default scenario shrunk to a 10 x 10 grid.
inline ScenarioConfig smallScenario(int q = 10) {
  ScenarioConfig cfg;
  cfg.q = q;
  return cfg;
}

inline ExperimentConfig smallExperiment(int q = 10) {
  ExperimentConfig cfg;
  cfg.scenario = smallScenario(q);
  return cfg;
}

/// The converged q = 10 analysis, shared across test cases.
inline const Analysis & smallAnalysis() {
  static const Analysis a = runAssimilation(smallExperiment());
  return a;
}

/// Random SPD matrix with eigenvalues spread over [lo, hi].
inline Matrix randomSpd(int n, double lo, double hi, Rng & rng) {
  const Matrix G = Eigen::Map<const Matrix>(standardNormal(n * n, rng).data(), n, n);
  const Eigen::HouseholderQR<Matrix> qr(G);
  const Matrix Q = qr.householderQ();
  Vector lambda(n);
  for (int k = 0; k < n; ++k) lambda[k] = lo + (hi - lo) * k / std::max(n - 1, 1);
  return Q * lambda.asDiagonal() * Q.transpose();
}

/// Perturbation with a physically sensible size for each variable.
inline Vector scaledDirection(const ScenarioConfig & cfg, Rng & rng) {
  Vector u = standardNormal(cfg.n(), rng);
  u.tail(2 * cfg.cells()) *= 10.0;
  return u;
}

}  // namespace obsimpact::test

#endif  // OBSIMPACT_TESTS_FIXTURES_H_
