/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_FOURDVAR_H_
#define OBSIMPACT_FOURDVAR_H_

#include <atomic>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "obsimpact/Covariance.h"
#include "obsimpact/LinearOperator.h"
#include "obsimpact/Linearized.h"
#include "obsimpact/Observations.h"

namespace obsimpact {

struct CostEvaluation {
  double j_total = 0.0;
  double j_background = 0.0;
  double j_observation = 0.0;
  std::optional<Vector> gradient;
};

// -----------------------------------------------------------------------------
/// Strong-constraint 4D-Var cost
///   J(x0) = 1/2 |x0 - xb|^2_{B^-1} + 1/2 sum_k |H_k x_k - y_k|^2_{R_k^-1}
/// over the window [0, n_steps_window].
class FourDVar {
 public:
  FourDVar(const ScenarioConfig & cfg, std::shared_ptr<const BackgroundCovariance> B,
           Vector background, std::shared_ptr<const ObservationSet> obs);

  const ScenarioConfig & config() const {return model_.config();}
  const ShallowWaterModel & model() const {return model_;}
  const BackgroundCovariance & covariance() const {return *B_;}
  std::shared_ptr<const BackgroundCovariance> covariancePtr() const {return B_;}
  const Vector & background() const {return xb_;}
  const ObservationSet & observations() const {return *obs_;}
  std::shared_ptr<const ObservationSet> observationsPtr() const {return obs_;}
  int size() const {return model_.size();}
  int windowSteps() const {return window_;}

  CostEvaluation cost(const Vector & x0) const;
  CostEvaluation costGrad(const Vector & x0) const;
  /// Same, reusing a checkpoint store built from x0 over the window.
  CostEvaluation costGrad(const Vector & x0, const CheckpointStore & store) const;

  std::shared_ptr<const CheckpointStore> checkpoints(const Vector & x0) const;
  /// Observation-time index at model step k, or -1.
  int timeAtStep(int k) const {return timeOfStep_[k];}
  /// H_k^T R_k^{-1} (H_k x_k - y_k) for observation time index t.
  Vector weightedInnovation(int t, const Vector & xk) const;
  /// H_k^T R_k^{-1} H_k dx for observation time index t.
  Vector weightedSelection(int t, const Vector & dx) const;

 private:
  double observationTerm(int t, const Vector & xk) const;

  ShallowWaterModel model_;
  std::shared_ptr<const BackgroundCovariance> B_;
  Vector xb_;
  std::shared_ptr<const ObservationSet> obs_;
  int window_;
  std::vector<int> timeOfStep_;
};

// -----------------------------------------------------------------------------
enum class HessianVariant {SoaExact, GaussNewton, FiniteDifference};

std::string_view hessianVariantName(HessianVariant v);
HessianVariant hessianVariantFromName(std::string_view name);

/// Matrix-free 4D-Var Hessian at a fixed linearization point.
///   SoaExact          B^-1 u + second-order adjoint sweep
///   GaussNewton       B^-1 u + sum_k M_k^T H_k^T R_k^-1 H_k M_k u
///   FiniteDifference  (grad J(x + eps u) - grad J(x)) / eps
/// The forward trajectory is computed once at construction.
class HessianOperator : public LinearOperator {
 public:
  HessianOperator(std::shared_ptr<const FourDVar> problem, const Vector & x0,
                  HessianVariant variant, double fdEpsilon = 0.0);

  int size() const override {return problem_->size();}
  Vector apply(const Vector & u) const override;

  HessianVariant variant() const {return variant_;}
  const Vector & point() const {return x_;}
  const FourDVar & problem() const {return *problem_;}
  std::shared_ptr<const FourDVar> problemPtr() const {return problem_;}
  std::shared_ptr<const CheckpointStore> store() const {return store_;}
  long matvecs() const {return count_.load();}
  void resetCounter() {count_ = 0;}
  /// Set when a finite-difference product came out below 1e-13 in norm.
  bool stepTooSmall() const {return stepTooSmall_.load();}

 private:
  Vector applySoa(const Vector & u) const;
  Vector applyGaussNewton(const Vector & u) const;
  Vector applyFiniteDifference(const Vector & u) const;

  std::shared_ptr<const FourDVar> problem_;
  Vector x_;
  HessianVariant variant_;
  double fdEpsilon_;
  std::shared_ptr<const CheckpointStore> store_;
  std::unique_ptr<LinearizedModel> linear_;
  std::vector<Vector> innovations_;   // per observation time, at x_
  Vector gradient_;                   // grad J(x_), finite-difference variant only
  mutable std::atomic<long> count_{0};
  mutable std::atomic<bool> stepTooSmall_{false};
};

/// Column i is A e_i.  Throws SizeGuard above n = 6000.
Matrix assembleDenseOperator(const LinearOperator & A, int jobs = 1);

}  // namespace obsimpact

#endif  // OBSIMPACT_FOURDVAR_H_
