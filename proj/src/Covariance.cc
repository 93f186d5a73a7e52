/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Covariance.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "obsimpact/Errors.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
Matrix gaussianCorrelation(int q, double corrLength, double nugget) {
  const int N = q * q;
  Matrix c = Matrix::Identity(N, N);
  if (corrLength > 0.0) {
    const double inv2l2 = 1.0 / (2.0 * corrLength * corrLength);
    for (int a = 0; a < N; ++a) {
      const int ia = a / q, ja = a % q;
      for (int b = 0; b < a; ++b) {
        const int di = ia - b / q, dj = ja - b % q;
        const double v = std::exp(-(di * di + dj * dj) * inv2l2);
        c(a, b) = v;
        c(b, a) = v;
      }
    }
  }
  c.diagonal().array() += nugget;
  return c;
}

// -----------------------------------------------------------------------------
BackgroundCovariance::BackgroundCovariance(int q, Vector stddev, double corrLength, double nugget)
  : q_(q), stddev_(std::move(stddev)), corrLength_(corrLength), nugget_(nugget)
{
  if (stddev_.size() != 3 * q * q) throw DimensionMismatch("background stddev length mismatch");
  if ((stddev_.array() <= 0.0).any() || !stddev_.allFinite()) {
    throw FactorizationFailure("background standard deviations must be positive and finite");
  }
  corr_ = gaussianCorrelation(q, corrLength, nugget);
  llt_.compute(corr_);
  if (llt_.info() != Eigen::Success) {
    throw FactorizationFailure("Gaussian correlation matrix is not numerically positive definite "
                               "(L = " + std::to_string(corrLength) + ", nugget = " +
                               std::to_string(nugget) + "); increase bg_corr_nugget");
  }
}

// -----------------------------------------------------------------------------
BackgroundCovariance BackgroundCovariance::fromReference(const ScenarioConfig & cfg,
                                                         const StateVector & reference,
                                                         const Trajectory * window) {
  const int N = cfg.cells();
  Vector sd(3 * N);
  for (Var v : {Var::H, Var::UH, Var::VH}) {
    double scale = reference.field(v).cwiseAbs().maxCoeff();
    if (window) {
      for (const StateVector & s : window->states) scale = std::max(scale, s.field(v).cwiseAbs().maxCoeff());
    }
    const double floor = cfg.bg_std_floor_fraction * scale;
    const int off = StateLayout(cfg.q).offset(v);
    for (int c = 0; c < N; ++c) {
      const double mag = std::max(std::abs(reference.values()[off + c]), floor);
      sd[off + c] = std::max(cfg.bg_std_fraction * mag, 1.0e-6);
    }
  }
  return BackgroundCovariance(cfg.q, std::move(sd), cfg.bg_corr_length, cfg.bg_corr_nugget);
}

// -----------------------------------------------------------------------------
void BackgroundCovariance::checkSize(const Vector & v) const {
  if (v.size() != size()) {
    throw DimensionMismatch("vector length " + std::to_string(v.size()) + " does not match n = " +
                            std::to_string(size()));
  }
}

// -----------------------------------------------------------------------------
Vector BackgroundCovariance::apply(const Vector & v) const {
  checkSize(v);
  const int N = q_ * q_;
  Vector scaled = stddev_.cwiseProduct(v);
  Vector out(size());
  for (int m = 0; m < 3; ++m) {
    out.segment(m * N, N).noalias() = corr_.selfadjointView<Eigen::Lower>() * scaled.segment(m * N, N);
  }
  return stddev_.cwiseProduct(out);
}

// -----------------------------------------------------------------------------
Vector BackgroundCovariance::applyInverse(const Vector & v) const {
  checkSize(v);
  const int N = q_ * q_;
  Matrix rhs(N, 3);
  for (int m = 0; m < 3; ++m) rhs.col(m) = v.segment(m * N, N).cwiseQuotient(stddev_.segment(m * N, N));
  llt_.solveInPlace(rhs);
  Vector out(size());
  for (int m = 0; m < 3; ++m) out.segment(m * N, N) = rhs.col(m);
  return out.cwiseQuotient(stddev_);
}

// -----------------------------------------------------------------------------
Vector BackgroundCovariance::diag() const {
  const int N = q_ * q_;
  Vector d(size());
  for (int m = 0; m < 3; ++m) {
    d.segment(m * N, N) = stddev_.segment(m * N, N).array().square() * corr_.diagonal().array();
  }
  return d;
}

// -----------------------------------------------------------------------------
Vector BackgroundCovariance::applySqrt(const Vector & z) const {
  checkSize(z);
  const int N = q_ * q_;
  Vector out(size());
  for (int m = 0; m < 3; ++m) {
    out.segment(m * N, N).noalias() = llt_.matrixL() * z.segment(m * N, N);
  }
  return stddev_.cwiseProduct(out);
}

// -----------------------------------------------------------------------------
Vector BackgroundCovariance::applySqrtInverseTranspose(const Vector & v) const {
  checkSize(v);
  const int N = q_ * q_;
  Matrix rhs(N, 3);
  for (int m = 0; m < 3; ++m) rhs.col(m) = v.segment(m * N, N);
  llt_.matrixU().solveInPlace(rhs);
  Vector out(size());
  for (int m = 0; m < 3; ++m) out.segment(m * N, N) = rhs.col(m);
  return out.cwiseQuotient(stddev_);
}

// -----------------------------------------------------------------------------
Vector BackgroundCovariance::sample(Rng & rng) const {
  return applySqrt(standardNormal(size(), rng));
}

}  // namespace obsimpact
