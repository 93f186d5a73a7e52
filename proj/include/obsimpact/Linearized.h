/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_LINEARIZED_H_
#define OBSIMPACT_LINEARIZED_H_

#include <functional>
#include <memory>
#include <vector>

#include "obsimpact/ShallowWater.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Forward trajectory with every RK4 stage state kept, so that tangent-linear
/// and adjoint sweeps reuse the exact values the forward model produced.
class CheckpointStore {
 public:
  CheckpointStore(const ShallowWaterModel & model, const StateVector & x0, int nSteps);

  int nSteps() const {return static_cast<int>(stages_.size());}
  int q() const {return q_;}
  /// Model state at step k, 0 <= k <= nSteps().
  const Vector & state(int k) const {return k < nSteps() ? stages_[k][0] : final_;}
  /// Stage states of the step from k to k + 1.
  const RkStages & stages(int k) const {return stages_[k];}

 private:
  int q_;
  std::vector<RkStages> stages_;
  Vector final_;
};

/// Adds forcing at step k into an adjoint variable.
using AdjointForcing = std::function<void(int k, Vector & lambda)>;
/// Adds second-order forcing at step k given the tangent-linear state dx_k.
using SecondOrderForcing = std::function<void(int k, const Vector & dxk, Vector & sigma)>;

// -----------------------------------------------------------------------------
/// Tangent-linear (TLM), first-order adjoint (FOA) and second-order adjoint
/// (SOA) models of the discrete forward model, linearized about a stored
/// trajectory.  All three are the exact derivatives of the RK4 update.
class LinearizedModel {
 public:
  LinearizedModel(const ShallowWaterModel & model, std::shared_ptr<const CheckpointStore> store);

  const CheckpointStore & store() const {return *store_;}
  int size() const {return model_.size();}

  /// dx_{k+1} = M_k dx_k; stage perturbations written to `tlStages` when non-null.
  void stepTL(int k, const Vector & dx, Vector & out, RkStages * tlStages = nullptr) const;
  /// lambda_k = M_k^T lambda_{k+1}
  void stepAD(int k, const Vector & lambda, Vector & out) const;
  /// Tangent of stepAD in the direction of the TLM stages of step k.
  void stepSOA(int k, const RkStages & tlStages, const Vector & lambda, const Vector & sigma,
               Vector & lambdaOut, Vector & sigmaOut) const;

  /// M_{0,n} dx0.
  Vector tlm(const Vector & dx0, int nSteps) const;
  /// dx_0 .. dx_n.
  std::vector<Vector> tlmTrajectory(const Vector & dx0, int nSteps) const;
  /// M_{0,n}^T lambdaF plus the adjoint-propagated forcings.
  Vector foa(const Vector & lambdaF, int nSteps, const AdjointForcing & forcing = {}) const;

  struct SecondOrderResult {
    Vector lambda0;
    Vector sigma0;
  };
  /// Forward-over-reverse sweep: runs the TLM from u, then integrates the
  /// first- and second-order adjoint variables backwards together.
  SecondOrderResult soa(const Vector & u, const Vector & lambdaF, int nSteps,
                        const AdjointForcing & forcing = {},
                        const SecondOrderForcing & secondForcing = {}) const;

 private:
  void checkSteps(int nSteps) const;

  ShallowWaterModel model_;
  std::shared_ptr<const CheckpointStore> store_;
};

// -----------------------------------------------------------------------------
// Convenience entry points that build the trajectory from x0.  When `store`
// is given it must have been produced from x0 (TrajectoryMismatch otherwise).

Vector tlm(const StateVector & x0, const Vector & dx0, int nSteps, const ScenarioConfig & cfg,
           std::shared_ptr<const CheckpointStore> store = nullptr);
Vector foa(const StateVector & x0, const Vector & lambdaF, int nSteps, const ScenarioConfig & cfg,
           std::shared_ptr<const CheckpointStore> store = nullptr);
/// Second derivative of <lambdaF, M_{0,n}(x0)> applied to u.
Vector soa(const StateVector & x0, const Vector & u, const Vector & lambdaF, int nSteps,
           const ScenarioConfig & cfg, std::shared_ptr<const CheckpointStore> store = nullptr);

}  // namespace obsimpact

#endif  // OBSIMPACT_LINEARIZED_H_
