/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Twin.h"

#include <algorithm>
#include <utility>

namespace obsimpact {

// -----------------------------------------------------------------------------
TwinExperiment buildTwin(const ScenarioConfig & cfg, double noiseScale) {
  cfg.validate();
  TwinExperiment twin;
  twin.cfg = cfg;
  const ShallowWaterModel model(cfg);
  twin.truth = model.propagate(makeReferenceInitialState(cfg),
                               std::max(cfg.n_steps_window, cfg.n_steps_verify));

  Trajectory window;
  window.states.assign(twin.truth.states.begin(), twin.truth.states.begin() + cfg.n_steps_window + 1);
  auto B = std::make_shared<const BackgroundCovariance>(
      BackgroundCovariance::fromReference(cfg, twin.truth.initial(), &window));

  Rng bgRng = makeRng(cfg.seed, RandomStream::Background);
  Vector xb = twin.truth.initial().values() + B->sample(bgRng);

  Rng obsRng = makeRng(cfg.seed, RandomStream::ObservationNoise);
  auto obs = std::make_shared<const ObservationSet>(synthesizeObservations(twin.truth, cfg, obsRng, noiseScale));

  twin.problem = std::make_shared<const FourDVar>(cfg, std::move(B), std::move(xb), std::move(obs));
  return twin;
}

// -----------------------------------------------------------------------------
TwinExperiment withObservations(const TwinExperiment & twin, std::shared_ptr<const ObservationSet> obs) {
  TwinExperiment out = twin;
  out.problem = std::make_shared<const FourDVar>(twin.cfg, twin.problem->covariancePtr(),
                                                 twin.problem->background(), std::move(obs));
  return out;
}

}  // namespace obsimpact
