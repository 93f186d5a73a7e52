/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <doctest.h>

#include <sstream>

#include "Fixtures.h"
#include "obsimpact/Errors.h"
#include "obsimpact/Lanczos.h"
#include "obsimpact/Preconditioners.h"

using namespace obsimpact;
using namespace obsimpact::test;

namespace {

/// Counts applications of a wrapped operator.
class Counting : public LinearOperator {
 public:
  explicit Counting(const LinearOperator & a) : a_(a) {}
  int size() const override {return a_.size();}
  Vector apply(const Vector & v) const override {++count; return a_.apply(v);}
  mutable int count = 0;
 private:
  const LinearOperator & a_;
};

void checkSpd(const LinearOperator & M, Rng & rng, int trials = 100) {
  for (int k = 0; k < trials; ++k) {
    const Vector v = standardNormal(M.size(), rng);
    CHECK(v.dot(M.apply(v)) > 0.0);
  }
}

}  // namespace

// -----------------------------------------------------------------------------
TEST_CASE("preconditioner names") {
  for (PreconditionerKind k : kAllPreconditioners) CHECK(preconditionerFromName(preconditionerName(k)) == k);
  CHECK(preconditionerName(PreconditionerKind::RandomizedSvd) == "randomized-svd");
  CHECK_THROWS_AS(preconditionerFromName("ilu"), ConfigError);
}

TEST_CASE("exact diagonal") {
  const IdentityOperator I(12);
  const PreconditionerPtr P = buildExactDiagonal(I);
  CHECK(P->apply(Vector::LinSpaced(12, 1, 12)) == Vector::LinSpaced(12, 1, 12));
  CHECK(P->buildMatvecs() == 12);

  Rng rng = makeRng(41, RandomStream::Probe);
  const Matrix A = randomSpd(30, 1.0, 50.0, rng);
  const DenseOperator dense(A);
  const Counting c(dense);
  const auto fromOp = std::static_pointer_cast<DiagonalPreconditioner>(buildExactDiagonal(c));
  const auto fromMat = std::static_pointer_cast<DiagonalPreconditioner>(buildExactDiagonal(A));
  CHECK(c.count == 30);
  CHECK(fromOp->diagonal() == fromMat->diagonal());
  CHECK(fromMat->diagonal() == A.diagonal().cwiseInverse());
  CHECK(fromMat->buildMatvecs() == 0);
  CHECK_THROWS_AS(buildExactDiagonal(IdentityOperator(6001)), SizeGuard);
}

TEST_CASE("exact diagonal of the small Hessian matches its dense assembly") {
  const auto & a = smallAnalysis();
  const HessianOperator H(a.twin.problem, a.xa(), HessianVariant::SoaExact);
  const Matrix dense = assembleDenseOperator(H);
  const auto P = std::static_pointer_cast<DiagonalPreconditioner>(buildExactDiagonal(H));
  CHECK(P->diagonal() == dense.diagonal().cwiseAbs().cwiseInverse());
}

TEST_CASE("background diagonal") {
  const BackgroundCovariance B(3, Vector::Constant(27, 2.0), 0.0, 0.0);
  const PreconditionerPtr P = buildB0Diagonal(B);
  CHECK(P->apply(Vector::Ones(27)).isApproxToConstant(4.0, 0.0));
  CHECK(P->buildMatvecs() == 0);
  Rng rng = makeRng(42, RandomStream::Probe);
  checkSpd(*P, rng);
}

TEST_CASE("row sum") {
  const Vector d = Vector::LinSpaced(20, 1.0, 20.0);
  const DenseOperator D(Matrix(d.asDiagonal()));
  const Counting c(D);
  const auto P = std::static_pointer_cast<DiagonalPreconditioner>(buildRowSum(c));
  CHECK(c.count == 1);
  CHECK(P->buildMatvecs() == 1);
  CHECK(P->diagonal() == d.cwiseInverse());

  // Strictly diagonally dominant with positive entries: row sums within 2x of the diagonal.
  Rng rng = makeRng(43, RandomStream::Probe);
  Matrix A = 0.01 * Matrix::Random(25, 25).cwiseAbs();
  A = 0.5 * (A + A.transpose()).eval();
  A.diagonal() = Vector::LinSpaced(25, 1.0, 3.0);
  const auto R = std::static_pointer_cast<DiagonalPreconditioner>(buildRowSum(DenseOperator(A)));
  const Vector ratio = R->diagonal().cwiseProduct(A.diagonal());
  CHECK(ratio.minCoeff() >= 0.5);
  CHECK(ratio.maxCoeff() <= 2.0);
  checkSpd(*R, rng);
}

TEST_CASE("probed block") {
  const int q = 4, N = 16;
  Vector d(3 * N);
  d << Vector::Constant(N, 2.0), Vector::Constant(N, 5.0), Vector::Constant(N, 7.0);
  const DenseOperator D(Matrix(d.asDiagonal()));
  const Counting c(D);
  const auto P = std::static_pointer_cast<DiagonalPreconditioner>(buildProbedBlock(c, q));
  CHECK(c.count == 3);
  CHECK(P->buildMatvecs() == 3);
  CHECK(P->diagonal() == d.cwiseInverse());
  CHECK_THROWS_AS(buildProbedBlock(D, 5), DimensionMismatch);
}

TEST_CASE("probed block of the small Hessian uses the first entry of each variable block") {
  const auto & a = smallAnalysis();
  const HessianOperator H(a.twin.problem, a.xa(), HessianVariant::SoaExact);
  const Matrix dense = assembleDenseOperator(H);
  const auto P = std::static_pointer_cast<DiagonalPreconditioner>(buildProbedBlock(H, 10));
  CHECK(relDiff(1.0 / P->diagonal()[0], dense(0, 0)) <= 1e-12);
  CHECK(relDiff(1.0 / P->diagonal()[150], dense(100, 100)) <= 1e-12);
  CHECK(relDiff(1.0 / P->diagonal()[299], dense(200, 200)) <= 1e-12);
}

TEST_CASE("L-BFGS preconditioner") {
  Rng rng = makeRng(44, RandomStream::Probe);
  const Matrix A = randomSpd(50, 1.0, 100.0, rng);

  const Vector s = standardNormal(50, rng);
  const PreconditionerPtr one = buildLbfgsLmp({{s, A * s}});
  CHECK(relDiff(one->apply(A * s), s) <= 1e-12);

  // Random pairs: SPD, and the newest secant equation holds.
  std::vector<CurvaturePair> pairs;
  for (int k = 0; k < 10; ++k) {
    const Vector sk = standardNormal(50, rng);
    pairs.push_back({sk, A * sk});
  }
  const PreconditionerPtr P = buildLbfgsLmp(pairs);
  checkSpd(*P, rng);
  CHECK(relDiff(P->apply(pairs.back().y), pairs.back().s) <= 1e-10);

  // A-conjugate steps: every secant equation holds, so M^{-1} A has a
  // ten-fold eigenvalue 1 on span(s).
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  std::vector<CurvaturePair> conj;
  for (int k = 0; k < 10; ++k) {
    const Vector sk = (1.0 + k) * eig.eigenvectors().col(3 * k);
    conj.push_back({sk, A * sk});
  }
  const PreconditionerPtr Q = buildLbfgsLmp(conj);
  for (const CurvaturePair & p : conj) CHECK(relDiff(Q->apply(p.y), p.s) <= 1e-10);
  const Matrix MA = assembleDenseOperator(FunctionOperator(50, [&](const Vector & v) {return Q->apply(A * v);}));
  const Eigen::EigenSolver<Matrix> es(MA, false);
  int ones = 0;
  for (int k = 0; k < 50; ++k) ones += std::abs(es.eigenvalues()[k] - 1.0) <= 1e-6;
  CHECK(ones >= 10);

  const std::vector<CurvaturePair> bad = {{s, -A * s}};
  CHECK_THROWS_AS(buildLbfgsLmp(bad), NoValidPairs);
}

TEST_CASE("eigenpair preconditioner") {
  Rng rng = makeRng(45, RandomStream::Probe);
  const Matrix A = randomSpd(50, 1.0, 10.0, rng);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(A);

  const PreconditionerPtr full = buildEigenpairLmp(es.eigenvalues(), es.eigenvectors());
  const Matrix MA = assembleDenseOperator(FunctionOperator(50, [&](const Vector & v) {return full->apply(A * v);}));
  CHECK((MA - Matrix::Identity(50, 50)).cwiseAbs().maxCoeff() <= 1e-8);

  const PreconditionerPtr empty = buildEigenpairLmp(Vector(), Matrix(50, 0));
  const Vector v = standardNormal(50, rng);
  CHECK(empty->apply(v) == v);

  // On the span of the captured pairs M^{-1} A acts as the identity.
  const PreconditionerPtr top = buildEigenpairLmp(es.eigenvalues().tail(5), es.eigenvectors().rightCols(5));
  const Vector w = es.eigenvectors().rightCols(5) * standardNormal(5, rng);
  CHECK(relDiff(top->apply(A * w), w) <= 1e-12);
  checkSpd(*top, rng);

  CHECK_THROWS_AS(buildEigenpairLmp(Vector::Constant(1, -1.0), es.eigenvectors().leftCols(1)), NonPositiveRitzValue);
}

TEST_CASE("randomized SVD captures a low-rank operator exactly") {
  Rng rng = makeRng(46, RandomStream::Sketch);
  const Matrix U = Eigen::HouseholderQR<Matrix>(Matrix::Random(60, 5)).householderQ() * Matrix::Identity(60, 5);
  const Vector lam = (Vector(5) << 9, 7, 5, 3, 2).finished();
  const Matrix A = U * lam.asDiagonal() * U.transpose();
  const DenseOperator op(A);
  const Counting c(op);
  const auto P = std::static_pointer_cast<SpectralPreconditioner>(buildRandomizedSvd(c, 5, rng, 2));
  CHECK(c.count == 10);
  CHECK(P->buildMatvecs() == 10);
  const Matrix rec = P->vectors() * P->values().asDiagonal() * P->vectors().transpose();
  CHECK((A - rec).norm() / A.norm() <= 1e-10);
  CHECK(P->values()[0] == doctest::Approx(9.0));

  Rng again = makeRng(46, RandomStream::Sketch);
  CHECK_THROWS_AS(buildRandomizedSvd(op, 10, again), RankDeficientSketch);
}

TEST_CASE("randomized SVD approximates the leading spectrum of the small Hessian") {
  const auto & a = smallAnalysis();
  const HessianOperator H(a.twin.problem, a.xa(), HessianVariant::SoaExact);
  const Matrix dense = assembleDenseOperator(H);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (dense + dense.transpose()), Eigen::EigenvaluesOnly);
  Rng rng = makeRng(47, RandomStream::Sketch);
  const auto P = std::static_pointer_cast<SpectralPreconditioner>(buildRandomizedSvd(H, 50, rng, 1));
  const int n = static_cast<int>(es.eigenvalues().size());
  for (int k = 0; k < 5; ++k) CHECK(relDiff(P->values()[k], es.eigenvalues()[n - 1 - k]) <= 0.1);
  checkSpd(*P, rng);
}

TEST_CASE("preconditioners are linear") {
  Rng rng = makeRng(48, RandomStream::Probe);
  const Matrix A = randomSpd(20, 1.0, 5.0, rng);
  std::vector<PreconditionerPtr> list = {
    buildExactDiagonal(A), buildRowSum(DenseOperator(A)),
    buildLbfgsLmp({{Vector::Ones(20), A * Vector::Ones(20)}}),
    buildEigenpairLmp(Vector::Constant(1, 3.0), Vector::Unit(20, 4)),
  };
  const Vector u = standardNormal(20, rng), v = standardNormal(20, rng);
  for (const auto & P : list) CHECK(relDiff(P->apply(2.0 * u - v), 2.0 * P->apply(u) - P->apply(v)) <= 1e-13);

  std::ostringstream os;
  writePreconditionerCsv(os, list);
  CHECK(os.str().rfind("kind,matvecs,seconds\nexact-diagonal,0,", 0) == 0);
}
