/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_COVARIANCE_H_
#define OBSIMPACT_COVARIANCE_H_

#include <array>

#include <Eigen/Cholesky>

#include "obsimpact/Random.h"
#include "obsimpact/ScenarioConfig.h"
#include "obsimpact/ShallowWater.h"
#include "obsimpact/StateVector.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Background-error covariance B = D (C + C + C) D: the same Gaussian spatial
/// correlation C_ij = exp(-d_ij^2 / (2 L^2)) for each variable (d in grid
/// points, no wraparound), scaled by a pointwise standard deviation D.  No
/// cross-variable correlation.  C carries a nugget on its diagonal and is
/// factored once by dense Cholesky.
class BackgroundCovariance {
 public:
  BackgroundCovariance(int q, Vector stddev, double corrLength, double nugget);

  /// Standard deviations as bg_std_fraction of |reference|, floored per
  /// variable at bg_std_floor_fraction times the largest magnitude that
  /// variable reaches over `window` (the reference itself when empty).
  static BackgroundCovariance fromReference(const ScenarioConfig & cfg, const StateVector & reference,
                                            const Trajectory * window = nullptr);

  int q() const {return q_;}
  int size() const {return 3 * q_ * q_;}
  double corrLength() const {return corrLength_;}
  double nugget() const {return nugget_;}
  const Vector & stddev() const {return stddev_;}

  Vector apply(const Vector & v) const;
  Vector applyInverse(const Vector & v) const;
  Vector diag() const;
  /// B^{1/2} z with the Cholesky square root.
  Vector applySqrt(const Vector & z) const;
  /// Inverse transpose of applySqrt.
  Vector applySqrtInverseTranspose(const Vector & v) const;
  Vector sample(Rng & rng) const;

  /// Dense per-variable correlation matrix (q^2 x q^2), nugget included.
  const Matrix & correlation() const {return corr_;}

 private:
  void checkSize(const Vector & v) const;

  int q_;
  Vector stddev_;
  double corrLength_;
  double nugget_;
  Matrix corr_;
  Eigen::LLT<Matrix> llt_;
};

/// Gaussian correlation matrix on a q x q grid.
Matrix gaussianCorrelation(int q, double corrLength, double nugget);

// -----------------------------------------------------------------------------
/// Uncorrelated observation errors: one standard deviation per variable.
struct ObservationErrorModel {
  std::array<double, 3> sigma = {1.0, 1.0, 1.0};

  double variance(Var v) const {
    const double s = sigma[static_cast<int>(v)];
    return s * s;
  }
};

}  // namespace obsimpact

#endif  // OBSIMPACT_COVARIANCE_H_
