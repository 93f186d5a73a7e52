/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_PRECONDITIONERS_H_
#define OBSIMPACT_PRECONDITIONERS_H_

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string_view>
#include <vector>

#include "obsimpact/Covariance.h"
#include "obsimpact/Lbfgs.h"
#include "obsimpact/LinearOperator.h"
#include "obsimpact/Random.h"

namespace obsimpact {

enum class PreconditionerKind {
  ExactDiagonal, B0Diagonal, RowSum, ProbedBlock, LbfgsLmp, EigenpairLmp, RandomizedSvd};

inline constexpr std::array<PreconditionerKind, 7> kAllPreconditioners = {
  PreconditionerKind::ExactDiagonal, PreconditionerKind::B0Diagonal, PreconditionerKind::RowSum,
  PreconditionerKind::ProbedBlock, PreconditionerKind::LbfgsLmp, PreconditionerKind::EigenpairLmp,
  PreconditionerKind::RandomizedSvd};

std::string_view preconditionerName(PreconditionerKind k);
PreconditionerKind preconditionerFromName(std::string_view name);

// -----------------------------------------------------------------------------
/// Applies M^{-1}.  Build cost is counted in operator applications of the
/// system matrix.
class Preconditioner : public LinearOperator {
 public:
  PreconditionerKind kind() const {return kind_;}
  int buildMatvecs() const {return buildMatvecs_;}
  double buildSeconds() const {return buildSeconds_;}
  void setBuildCost(int matvecs, double seconds) {buildMatvecs_ = matvecs; buildSeconds_ = seconds;}

 protected:
  explicit Preconditioner(PreconditionerKind kind) : kind_(kind) {}

 private:
  PreconditionerKind kind_;
  int buildMatvecs_ = 0;
  double buildSeconds_ = 0.0;
};

using PreconditionerPtr = std::shared_ptr<Preconditioner>;

/// M^{-1} = diag(d).
class DiagonalPreconditioner : public Preconditioner {
 public:
  DiagonalPreconditioner(PreconditionerKind kind, Vector d) : Preconditioner(kind), d_(std::move(d)) {}
  int size() const override {return static_cast<int>(d_.size());}
  Vector apply(const Vector & v) const override {checkSize(v); return d_.cwiseProduct(v);}
  const Vector & diagonal() const {return d_;}

 private:
  Vector d_;
};

/// Inverse-Hessian approximation of the L-BFGS two-loop recursion.
class LbfgsPreconditioner : public Preconditioner {
 public:
  LbfgsPreconditioner(std::vector<CurvaturePair> pairs, std::function<Vector(const Vector &)> initial);
  int size() const override {return static_cast<int>(pairs_.front().s.size());}
  Vector apply(const Vector & v) const override;
  const std::vector<CurvaturePair> & pairs() const {return pairs_;}

 private:
  std::vector<CurvaturePair> pairs_;
  std::function<Vector(const Vector &)> initial_;
};

/// M^{-1} = I + sum_i (1/lambda_i - 1) v_i v_i^T with orthonormal v_i.
class SpectralPreconditioner : public Preconditioner {
 public:
  SpectralPreconditioner(PreconditionerKind kind, Vector values, Matrix vectors);
  int size() const override {return static_cast<int>(vectors_.rows());}
  Vector apply(const Vector & v) const override;
  const Vector & values() const {return values_;}
  const Matrix & vectors() const {return vectors_;}

 private:
  Vector values_;
  Matrix vectors_;
};

// -----------------------------------------------------------------------------
/// 1 / max(|A_ii|, 1e-12) from n unit-vector products.  SizeGuard above n = 6000.
PreconditionerPtr buildExactDiagonal(const LinearOperator & A);
/// Same, from an assembled matrix (no products counted).
PreconditionerPtr buildExactDiagonal(const Matrix & A);
/// M^{-1} = diag(B0).
PreconditionerPtr buildB0Diagonal(const BackgroundCovariance & B);
/// 1 / max(|A 1|, 1e-12) from a single product.
PreconditionerPtr buildRowSum(const LinearOperator & A);
/// Diagonal entries of the columns at offsets 0, q^2, 2 q^2 fill their whole
/// variable block; three products.
PreconditionerPtr buildProbedBlock(const LinearOperator & A, int q);
/// Throws NoValidPairs when no pair has s^T y > 0.  `initial` shapes the
/// starting matrix (identity when empty).
PreconditionerPtr buildLbfgsLmp(const std::vector<CurvaturePair> & pairs,
                                std::function<Vector(const Vector &)> initial = {});
/// Throws NonPositiveRitzValue.
PreconditionerPtr buildEigenpairLmp(const Vector & values, const Matrix & vectors);
/// Range sketch Y = A Omega, Q = qr(Y), T = Q^T A Q; eigenpairs of T give the
/// spectral preconditioner.  2 ell products, run on `jobs` threads.
/// Throws RankDeficientSketch.
PreconditionerPtr buildRandomizedSvd(const LinearOperator & A, int ell, Rng & rng, int jobs = 1);

/// CSV with header "kind,matvecs,seconds".
void writePreconditionerCsv(std::ostream & os, const std::vector<PreconditionerPtr> & list);

/// Applies A to each column of X, spreading the columns over `jobs` threads.
Matrix applyColumns(const LinearOperator & A, const Matrix & X, int jobs);

}  // namespace obsimpact

#endif  // OBSIMPACT_PRECONDITIONERS_H_
