/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Preconditioners.h"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "obsimpact/Errors.h"
#include "obsimpact/Parallel.h"

namespace obsimpact {

namespace {

constexpr double kDiagonalFloor = 1.0e-12;

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vector invertAbs(const Vector & d) {
  return d.cwiseAbs().cwiseMax(kDiagonalFloor).cwiseInverse();
}

}  // namespace

// -----------------------------------------------------------------------------
std::string_view preconditionerName(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::ExactDiagonal: return "exact-diagonal";
    case PreconditionerKind::B0Diagonal: return "b0-diagonal";
    case PreconditionerKind::RowSum: return "row-sum";
    case PreconditionerKind::ProbedBlock: return "probed-block";
    case PreconditionerKind::LbfgsLmp: return "lbfgs";
    case PreconditionerKind::EigenpairLmp: return "eigenpair";
    case PreconditionerKind::RandomizedSvd: return "randomized-svd";
  }
  return "?";
}

PreconditionerKind preconditionerFromName(std::string_view name) {
  for (PreconditionerKind k : kAllPreconditioners) {
    if (name == preconditionerName(k)) return k;
  }
  throw ConfigError("unknown preconditioner '" + std::string(name) +
                    "' (expected exact-diagonal, b0-diagonal, row-sum, probed-block, lbfgs, "
                    "eigenpair or randomized-svd)");
}

// -----------------------------------------------------------------------------
LbfgsPreconditioner::LbfgsPreconditioner(std::vector<CurvaturePair> pairs,
                                         std::function<Vector(const Vector &)> initial)
  : Preconditioner(PreconditionerKind::LbfgsLmp), pairs_(std::move(pairs)), initial_(std::move(initial)) {}

Vector LbfgsPreconditioner::apply(const Vector & v) const {
  checkSize(v);
  return lbfgsTwoLoop(pairs_, v, initial_);
}

// -----------------------------------------------------------------------------
SpectralPreconditioner::SpectralPreconditioner(PreconditionerKind kind, Vector values, Matrix vectors)
  : Preconditioner(kind), values_(std::move(values)), vectors_(std::move(vectors))
{
  if (vectors_.cols() != values_.size()) throw DimensionMismatch("eigenvalue/eigenvector count mismatch");
  for (int i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0)) {
      throw NonPositiveRitzValue("Ritz value " + std::to_string(i) + " is " + std::to_string(values_[i]));
    }
  }
}

Vector SpectralPreconditioner::apply(const Vector & v) const {
  checkSize(v);
  if (values_.size() == 0) return v;
  const Vector c = vectors_.transpose() * v;
  const Vector scaled = c.cwiseProduct((values_.cwiseInverse().array() - 1.0).matrix());
  return v + vectors_ * scaled;
}

// -----------------------------------------------------------------------------
Matrix applyColumns(const LinearOperator & A, const Matrix & X, int jobs) {
  Matrix Y(X.rows(), X.cols());
  parallelFor(static_cast<int>(X.cols()), jobs, [&](int i) {Y.col(i) = A.apply(X.col(i));});
  return Y;
}

// -----------------------------------------------------------------------------
PreconditionerPtr buildExactDiagonal(const LinearOperator & A) {
  const int n = A.size();
  if (n > 6000) throw SizeGuard("exact diagonal needs n = " + std::to_string(n) + " products; limit 6000");
  const auto t0 = std::chrono::steady_clock::now();
  Vector d(n);
  Vector e = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    e[i] = 1.0;
    d[i] = A.apply(e)[i];
    e[i] = 0.0;
  }
  auto p = std::make_shared<DiagonalPreconditioner>(PreconditionerKind::ExactDiagonal, invertAbs(d));
  p->setBuildCost(n, since(t0));
  return p;
}

PreconditionerPtr buildExactDiagonal(const Matrix & A) {
  return std::make_shared<DiagonalPreconditioner>(PreconditionerKind::ExactDiagonal,
                                                  invertAbs(A.diagonal()));
}

// -----------------------------------------------------------------------------
PreconditionerPtr buildB0Diagonal(const BackgroundCovariance & B) {
  return std::make_shared<DiagonalPreconditioner>(PreconditionerKind::B0Diagonal, B.diag());
}

// -----------------------------------------------------------------------------
PreconditionerPtr buildRowSum(const LinearOperator & A) {
  const auto t0 = std::chrono::steady_clock::now();
  const Vector rows = A.apply(Vector::Ones(A.size()));
  auto p = std::make_shared<DiagonalPreconditioner>(PreconditionerKind::RowSum, invertAbs(rows));
  p->setBuildCost(1, since(t0));
  return p;
}

// -----------------------------------------------------------------------------
PreconditionerPtr buildProbedBlock(const LinearOperator & A, int q) {
  const int n = A.size();
  const int N = q * q;
  if (n != 3 * N) throw DimensionMismatch("probing expects an operator of size 3 q^2");
  const auto t0 = std::chrono::steady_clock::now();
  Vector d(n);
  for (int m = 0; m < 3; ++m) {
    Vector e = Vector::Zero(n);
    e[m * N] = 1.0;
    d.segment(m * N, N).setConstant(A.apply(e)[m * N]);
  }
  auto p = std::make_shared<DiagonalPreconditioner>(PreconditionerKind::ProbedBlock, invertAbs(d));
  p->setBuildCost(3, since(t0));
  return p;
}

// -----------------------------------------------------------------------------
PreconditionerPtr buildLbfgsLmp(const std::vector<CurvaturePair> & pairs,
                                std::function<Vector(const Vector &)> initial) {
  std::vector<CurvaturePair> valid;
  for (const CurvaturePair & p : pairs) {
    if (p.s.dot(p.y) > 0.0) valid.push_back(p);
  }
  if (valid.empty()) throw NoValidPairs("no curvature pair satisfies s^T y > 0");
  return std::make_shared<LbfgsPreconditioner>(std::move(valid), std::move(initial));
}

// -----------------------------------------------------------------------------
PreconditionerPtr buildEigenpairLmp(const Vector & values, const Matrix & vectors) {
  return std::make_shared<SpectralPreconditioner>(PreconditionerKind::EigenpairLmp, values, vectors);
}

// -----------------------------------------------------------------------------
PreconditionerPtr buildRandomizedSvd(const LinearOperator & A, int ell, Rng & rng, int jobs) {
  const int n = A.size();
  if (ell < 1 || ell > n) throw ConfigError("sketch size must lie in [1, n]");
  const auto t0 = std::chrono::steady_clock::now();
  Matrix omega(n, ell);
  for (int j = 0; j < ell; ++j) omega.col(j) = standardNormal(n, rng);
  const Matrix Y = applyColumns(A, omega, jobs);

  Eigen::HouseholderQR<Matrix> qr(Y);
  const Matrix R = qr.matrixQR().topRows(ell).triangularView<Eigen::Upper>();
  const double r0 = R.diagonal().cwiseAbs().maxCoeff();
  for (int j = 0; j < ell; ++j) {
    if (!(std::abs(R(j, j)) > 1.0e-12 * r0)) {
      throw RankDeficientSketch("sketch has numerical rank below " + std::to_string(ell) +
                                "; reduce ell");
    }
  }
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, ell);
  const Matrix AQ = applyColumns(A, Q, jobs);
  const Matrix T = 0.5 * (Q.transpose() * AQ + AQ.transpose() * Q);
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  // Descending order, like the Lanczos pairs.
  const Vector values = es.eigenvalues().reverse();
  const Matrix vectors = Q * es.eigenvectors().rowwise().reverse();
  auto p = std::make_shared<SpectralPreconditioner>(PreconditionerKind::RandomizedSvd, values, vectors);
  p->setBuildCost(2 * ell, since(t0));
  return p;
}

// -----------------------------------------------------------------------------
void writePreconditionerCsv(std::ostream & os, const std::vector<PreconditionerPtr> & list) {
  os << "kind,matvecs,seconds\n" << std::setprecision(17);
  for (const auto & p : list) {
    os << preconditionerName(p->kind()) << ',' << p->buildMatvecs() << ',' << p->buildSeconds() << '\n';
  }
}

}  // namespace obsimpact
