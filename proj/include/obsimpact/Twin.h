/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_TWIN_H_
#define OBSIMPACT_TWIN_H_

#include <memory>

#include "obsimpact/FourDVar.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Synthetic twin experiment: a reference run from the Gaussian bell, a
/// background obtained by adding a B-correlated perturbation to its initial
/// state, and noisy observations of the reference over the window.
struct TwinExperiment {
  ScenarioConfig cfg;
  Trajectory truth;                  // steps 0 .. max(window, verification)
  std::shared_ptr<const FourDVar> problem;

  const StateVector & truthInitial() const {return truth.initial();}
  const Vector & background() const {return problem->background();}
  /// Reference state at the verification step.
  const StateVector & verification() const {return truth.states.at(cfg.n_steps_verify);}
};

/// noiseScale multiplies the observation noise (0 gives exact observations).
TwinExperiment buildTwin(const ScenarioConfig & cfg, double noiseScale = 1.0);

/// Same twin with the given observation set substituted.
TwinExperiment withObservations(const TwinExperiment & twin, std::shared_ptr<const ObservationSet> obs);

}  // namespace obsimpact

#endif  // OBSIMPACT_TWIN_H_
