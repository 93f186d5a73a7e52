/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_OBSERVATIONS_H_
#define OBSIMPACT_OBSERVATIONS_H_

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "obsimpact/Covariance.h"
#include "obsimpact/Random.h"
#include "obsimpact/ScenarioConfig.h"
#include "obsimpact/ShallowWater.h"

namespace obsimpact {

/// One observed (variable, grid point).
struct ObsSite {
  Var var;
  int i;
  int j;
  bool operator==(const ObsSite &) const = default;
};

// -----------------------------------------------------------------------------
/// Observations y_k at model steps t_k through linear selection operators H_k
/// with diagonal error covariances R_k.
class ObservationSet {
 public:
  ObservationSet(int q, std::vector<int> steps, std::vector<std::vector<ObsSite>> selectors,
                 std::vector<Vector> values, std::vector<Vector> sigmas);

  int q() const {return q_;}
  int nTimes() const {return static_cast<int>(steps_.size());}
  int step(int k) const {return steps_.at(k);}
  const std::vector<int> & steps() const {return steps_;}
  int count(int k) const {return static_cast<int>(selectors_.at(k).size());}
  int totalCount() const;
  const std::vector<ObsSite> & selector(int k) const {return selectors_.at(k);}
  const Vector & values(int k) const {return values_.at(k);}
  const Vector & sigma(int k) const {return sigmas_.at(k);}
  /// Time index observed at model step `step`, if any.
  std::optional<int> timeAtStep(int step) const;

  /// H_k x
  Vector hApply(int k, const Vector & x) const;
  /// H_k^T w as a full state-space vector.
  Vector hTranspose(int k, const Vector & w) const;
  /// out += H_k^T w
  void hTransposeAdd(int k, const Vector & w, Vector & out) const;
  /// R_k^{-1} w
  Vector rInverse(int k, const Vector & w) const;

  ObservationSet withValues(std::vector<Vector> values) const;

 private:
  void checkTime(int k) const;

  int q_;
  std::vector<int> steps_;
  std::vector<std::vector<ObsSite>> selectors_;
  std::vector<std::vector<int>> flat_;
  std::vector<Vector> values_;
  std::vector<Vector> sigmas_;
};

// -----------------------------------------------------------------------------
/// Observation steps of the window: every obs_every steps, step 0 optional.
std::vector<int> observationSteps(const ScenarioConfig & cfg);

/// All three variables at every obs_stride-th grid point in i and j.
std::vector<ObsSite> observationNetwork(int q, int stride = 1);

/// Per-variable standard deviation: obs_std_fraction of the largest absolute
/// value that variable takes over all observed sites and times.
ObservationErrorModel observationErrors(const Trajectory & reference, const ScenarioConfig & cfg,
                                        const std::vector<ObsSite> & network);

/// y_k = H_k x_ref(t_k) + noiseScale * eta,  eta ~ N(0, R_k).
ObservationSet synthesizeObservations(const Trajectory & reference, const ScenarioConfig & cfg,
                                      Rng & rng, double noiseScale = 1.0);
ObservationSet synthesizeObservations(const Trajectory & reference, const ScenarioConfig & cfg,
                                      const std::vector<ObsSite> & network,
                                      const ObservationErrorModel & errors, Rng & rng,
                                      double noiseScale = 1.0);

// -----------------------------------------------------------------------------
enum class FaultMode {Multiplicative, Additive};

struct FaultSpec {
  FaultMode mode = FaultMode::Multiplicative;
  double magnitude = 0.5;   // value * (1 + magnitude), or value + magnitude
};

/// Corrupts h, uh and vh at each (i, j) site at the final observation time.
/// Throws SiteNotObserved when a site is missing from the final selector.
ObservationSet injectFaults(const ObservationSet & obs, const std::vector<std::pair<int, int>> & sites,
                            const FaultSpec & spec = {});

/// CSV with header "step,var,i,j,value,sigma".
void writeObservationsCsv(std::ostream & os, const ObservationSet & obs);

}  // namespace obsimpact

#endif  // OBSIMPACT_OBSERVATIONS_H_
