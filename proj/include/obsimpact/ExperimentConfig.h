/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_EXPERIMENTCONFIG_H_
#define OBSIMPACT_EXPERIMENTCONFIG_H_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "obsimpact/FourDVar.h"
#include "obsimpact/Krylov.h"
#include "obsimpact/Multigrid.h"
#include "obsimpact/Observations.h"
#include "obsimpact/Preconditioners.h"
#include "obsimpact/ScenarioConfig.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Everything a command needs.  Read from flat "key = value" text; '#'
/// starts a comment.  Unknown keys and invalid names are rejected.
struct ExperimentConfig {
  ScenarioConfig scenario;
  std::string out_dir = "out";

  // simulate
  int simulate_steps = 100;
  int snapshot_stride = 1;

  // assimilate
  double obs_noise_scale = 1.0;
  bool start_from_truth = false;
  int max_iters = 400;
  double grad_tol_rel = 1.0e-10;

  // impact / bench
  HessianVariant hessian = HessianVariant::SoaExact;
  KrylovMethod solver = KrylovMethod::CG;
  std::vector<PreconditionerKind> preconditioners;   // empty: none
  int budget = 100;
  bool dense_reference = false;
  int lanczos_k = 50;
  int lanczos_max_matvecs = 300;
  int rsvd_ell = 50;
  int lbfgs_pairs = 10;

  // multigrid
  std::vector<MgSchedule> mg_schedules;   // empty: 1, 2 and 3 even cycles
  HessianVariant coarse_hessian = HessianVariant::GaussNewton;

  // faulty observations
  std::vector<std::pair<int, int>> fault_sites;   // empty: (q/4, q/2) and (3q/4, q/2)
  FaultSpec fault;
  double dominance_threshold = 1.5;   // second local maximum over the third

  /// fault_sites, or the grid default when none are configured.
  std::vector<std::pair<int, int>> faultSites() const;
  void validate() const;
};

/// Throws ConfigError naming the offending line.
ExperimentConfig parseExperimentConfig(std::istream & is);
ExperimentConfig loadExperimentConfig(const std::string & path);

/// Writes every key with its current value in the parseable format.
void writeExperimentConfig(std::ostream & os, const ExperimentConfig & cfg);

}  // namespace obsimpact

#endif  // OBSIMPACT_EXPERIMENTCONFIG_H_
