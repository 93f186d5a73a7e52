/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_IMPACT_H_
#define OBSIMPACT_IMPACT_H_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "obsimpact/FourDVar.h"
#include "obsimpact/Krylov.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
/// E(x0) = (x_f - xv_f)^T C (x_f - xv_f) with x_f the forecast from x0 after
/// `steps` model steps and C = diag(weights).
struct ForecastScoreSpec {
  StateVector verification;
  int steps = 0;
  Vector weights;   // empty means C = I

  /// Identity weighting at the verification time of cfg.
  static ForecastScoreSpec identity(const StateVector & verification, int steps);
  /// Throws ConfigError for negative weights or a length mismatch.
  void validate() const;
};

/// Diagonal of C that keeps all three variables on the cells
/// i0 <= i < i1, j0 <= j < j1.
Vector subdomainMask(int q, int i0, int i1, int j0, int j1);

double forecastScore(const ScenarioConfig & cfg, const Vector & x0, const ForecastScoreSpec & spec);

/// 2 M_{0,f}^T C (x_f - xv_f) by one first-order adjoint sweep.
Vector scoreGradient(const ScenarioConfig & cfg, const Vector & x0, const ForecastScoreSpec & spec);

/// Solves H mu0 = rhs; mu0 is report.x.
SolverReport solveSupersensitivity(const LinearOperator & H, const Vector & rhs, KrylovMethod method,
                                   const LinearOperator * M, const SolveBudget & budget);

// -----------------------------------------------------------------------------
struct ImpactResult {
  Vector mu0;
  std::vector<int> steps;                  // observation steps
  std::vector<Vector> mu;                  // mu_k = M_{0,k} mu0
  std::vector<Vector> obsSensitivity;      // R_k^{-1} H_k mu_k, aligned with the selectors
  Vector backgroundSensitivity;            // B^{-1} mu0
};

/// Sensitivities of the forecast score to the observations and to the
/// background, given the supersensitivity mu0 at the analysis xa0.
ImpactResult observationSensitivities(const FourDVar & problem, const Vector & xa0, const Vector & mu0);

/// H_k^T of the observation sensitivities at time index k as a state field
/// (zero on unobserved entries).
StateVector sensitivityField(const FourDVar & problem, const ImpactResult & result, int k);

/// Observation impact at time index k: each sensitivity times the analysis
/// departure y - H x^a_k of its observation, scattered to a state field.
StateVector impactField(const FourDVar & problem, const ImpactResult & result, const Vector & xa0, int k);

/// sqrt(sum over variables of s^2) per cell, q^2 entries.
Vector sensitivityMagnitude(const StateVector & field);

struct LocalMaximum {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

/// Cells strictly larger than all their (up to 8) neighbours, largest first.
std::vector<LocalMaximum> localMaxima(const Vector & cellField, int q);

/// The two leading local maxima and how far they stand above the rest.
struct DominantPair {
  std::vector<LocalMaximum> top;   // up to two entries
  double ratio = 0.0;              // second maximum over third (inf with fewer than three)
  bool dominant = false;           // ratio >= threshold
};

DominantPair dominantPair(const Vector & cellField, int q, double threshold);

// -----------------------------------------------------------------------------
/// Writes mu0.swef, sens_background.swef and sens_obs_step<k>.swef.
void writeImpactFields(const std::string & dir, const FourDVar & problem, const ImpactResult & result);
/// CSV with header "step,var,i,j,sensitivity".
void writeImpactCsv(std::ostream & os, const FourDVar & problem, const ImpactResult & result);

}  // namespace obsimpact

#endif  // OBSIMPACT_IMPACT_H_
