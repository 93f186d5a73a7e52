/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_EXPERIMENTS_H_
#define OBSIMPACT_EXPERIMENTS_H_

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "obsimpact/ExperimentConfig.h"
#include "obsimpact/Impact.h"
#include "obsimpact/Lbfgs.h"
#include "obsimpact/Twin.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
// Building blocks shared by the commands and the acceptance checks.

/// Twin experiment and its 4D-Var analysis.
struct Analysis {
  TwinExperiment twin;
  MinimizerReport minimizer;
  const Vector & xa() const {return minimizer.x;}
};

/// Builds the twin (optionally with faulty observations at the final time)
/// and minimizes from the background, or from the truth when configured.
Analysis runAssimilation(const ExperimentConfig & cfg, bool withFaults = false);

/// Hessian at the analysis and the forecast-score gradient.
struct SupersensitivitySystem {
  std::shared_ptr<HessianOperator> hessian;
  ForecastScoreSpec score;
  Vector rhs;
};

SupersensitivitySystem buildSystem(const Analysis & analysis, HessianVariant variant);

/// Dense assembly and Cholesky solve of the system (oracle runs only).
struct DenseReference {
  Matrix hessian;
  Vector solution;
};

DenseReference denseReference(const SupersensitivitySystem & sys, int jobs);

/// One preconditioner of the given kind for the system.  The exact diagonal
/// comes from `dense` when available.
PreconditionerPtr makePreconditioner(PreconditionerKind kind, const ExperimentConfig & cfg,
                                     const Analysis & analysis, const SupersensitivitySystem & sys,
                                     const Matrix * dense, int jobs);

// -----------------------------------------------------------------------------
// Commands.  Each writes its files under `out` and a short summary to `log`.

void cmdSimulate(const ExperimentConfig & cfg, const std::string & out, std::ostream & log);
void cmdAssimilate(const ExperimentConfig & cfg, const std::string & out, std::ostream & log);
void cmdImpact(const ExperimentConfig & cfg, const std::string & out, int jobs, std::ostream & log);
void cmdBenchSolvers(const ExperimentConfig & cfg, const std::string & out, int jobs, std::ostream & log);
void cmdMg(const ExperimentConfig & cfg, const std::string & out, int jobs, std::ostream & log);

/// Local maxima of the final-time sensitivity magnitude |dE/dy|, and, as a
/// diagnostic, of the observation impact |dE/dy (y - H x^a)|.
struct FaultyOutcome {
  DominantPair faulted;
  DominantPair control;
  DominantPair faultedImpact;
  DominantPair controlImpact;
  bool detected = false;   // faulted sensitivity pair dominant and at the fault sites
};

FaultyOutcome runFaulty(const ExperimentConfig & cfg, int jobs, const std::string & out = {});
void cmdFaulty(const ExperimentConfig & cfg, const std::string & out, int jobs, std::ostream & log);

/// Thread count: the --jobs value, capped by OBS_IMPACT_THREADS when set.
int resolveJobs(int requested);

}  // namespace obsimpact

#endif  // OBSIMPACT_EXPERIMENTS_H_
