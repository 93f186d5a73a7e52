/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "Fixtures.h"
#include "obsimpact/Errors.h"
#include "obsimpact/Krylov.h"
#include "obsimpact/Lanczos.h"
#include "obsimpact/Preconditioners.h"

using namespace obsimpact;
using namespace obsimpact::test;

namespace {

std::string nameOf(KrylovMethod m) {return std::string(krylovMethodName(m));}

}  // namespace

// -----------------------------------------------------------------------------
TEST_CASE("identity system is solved in one iteration by every method") {
  const IdentityOperator I(30);
  Rng rng = makeRng(31, RandomStream::Probe);
  const Vector b = standardNormal(30, rng);
  for (KrylovMethod m : kAllKrylovMethods) {
    CAPTURE(nameOf(m));
    const SolverReport r = solve(m, I, b, nullptr, {});
    CHECK(r.converged);
    CHECK(r.trace.back().iter == 1);
    CHECK(relDiff(r.x, b) <= 1e-14);
  }
}

TEST_CASE("all methods match a dense direct solve on an SPD system") {
  Rng rng = makeRng(32, RandomStream::Probe);
  const DenseOperator A(randomSpd(50, 1.0, 10.0, rng));
  const Vector b = standardNormal(50, rng);
  const Vector exact = A.matrix().llt().solve(b);
  for (KrylovMethod m : kAllKrylovMethods) {
    CAPTURE(nameOf(m));
    SolveBudget budget;
    budget.max_matvecs = 100 * matvecsPerIteration(m);
    budget.residual_tol = 1e-12;
    budget.reference = exact;
    const SolverReport r = solve(m, A, b, nullptr, budget);
    CHECK(r.converged);
    CHECK(!r.breakdown);
    CHECK(r.matvecs <= budget.max_matvecs);
    CHECK(relDiff(r.x, exact) <= 1e-8);
    // Residual from the recurrences against an explicit recomputation.
    const double explicitResidual = (b - A.apply(r.x)).norm();
    CHECK(relDiff(r.residual.norm(), explicitResidual) <= 1e-6 + 1e-12 * b.norm() / explicitResidual);
    CHECK(r.last().rmse <= 1e-8);
  }
}

TEST_CASE("preconditioned methods converge on a badly scaled system") {
  Rng rng = makeRng(33, RandomStream::Probe);
  const Vector scale = Vector::LinSpaced(40, 0.0, 4.0).unaryExpr([](double t) {return std::pow(10.0, t);});
  const Matrix S = scale.cwiseSqrt().asDiagonal();
  const DenseOperator A(S * randomSpd(40, 1.0, 4.0, rng) * S);
  const Vector b = standardNormal(40, rng);
  const Vector exact = A.matrix().llt().solve(b);
  const PreconditionerPtr M = buildExactDiagonal(A.matrix());
  for (KrylovMethod m : kAllKrylovMethods) {
    CAPTURE(nameOf(m));
    SolveBudget budget;
    budget.max_matvecs = 200;
    budget.residual_tol = 1e-12;
    const SolverReport plain = solve(m, A, b, nullptr, budget);
    const SolverReport pre = solve(m, A, b, M.get(), budget);
    CHECK(relDiff(pre.x, exact) <= 1e-6);
    CHECK(pre.matvecs <= plain.matvecs);
  }
}

TEST_CASE("CG energy error and GMRES residual never increase") {
  Rng rng = makeRng(34, RandomStream::Probe);
  const DenseOperator A(randomSpd(60, 0.01, 10.0, rng));
  const Vector b = standardNormal(60, rng);
  const Vector exact = A.matrix().llt().solve(b);
  SolveBudget budget;
  budget.max_matvecs = 40;

  // Energy norm along the CG iterates, rebuilt by re-running with growing budgets.
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 40; ++k) {
    budget.max_matvecs = k;
    const Vector e = solve(KrylovMethod::CG, A, b, nullptr, budget).x - exact;
    const double energy = std::sqrt(e.dot(A.apply(e)));
    CHECK(energy <= previous * (1.0 + 1e-12));
    previous = energy;
  }

  budget.max_matvecs = 40;
  const SolverReport g = solve(KrylovMethod::GMRES, A, b, nullptr, budget);
  for (size_t k = 1; k < g.trace.size(); ++k) CHECK(g.trace[k].residual <= g.trace[k - 1].residual * (1.0 + 1e-12));
}

TEST_CASE("budget, trace and initial guess bookkeeping") {
  Rng rng = makeRng(35, RandomStream::Probe);
  const DenseOperator A(randomSpd(80, 0.001, 10.0, rng));
  const Vector b = standardNormal(80, rng);
  for (KrylovMethod m : kAllKrylovMethods) {
    CAPTURE(nameOf(m));
    SolveBudget budget;
    budget.max_matvecs = 15;
    const SolverReport r = solve(m, A, b, nullptr, budget);
    CHECK(r.matvecs <= 15);
    CHECK(r.trace.front().iter == 0);
    CHECK(r.trace.front().residual == doctest::Approx(b.norm()));
    CHECK(std::isnan(r.trace.front().rmse));
    CHECK(&r.atMatvecs(0) == &r.trace.front());
  }
  SolveBudget warm;
  warm.x0 = A.matrix().llt().solve(b);
  warm.residual_tol = 1e-8;
  const SolverReport r = solve(KrylovMethod::CG, A, b, nullptr, warm);
  CHECK(r.converged);
  CHECK(r.matvecs == 1);

  SolveBudget none;
  none.max_matvecs = 0;
  CHECK_THROWS_AS(solve(KrylovMethod::CG, A, b, nullptr, none), ConfigError);
  CHECK_THROWS_AS(solve(KrylovMethod::CG, A, Vector::Ones(3), nullptr, {}), DimensionMismatch);
}

TEST_CASE("zero right-hand side gives the zero solution") {
  Rng rng = makeRng(36, RandomStream::Probe);
  const DenseOperator A(randomSpd(10, 1.0, 2.0, rng));
  for (KrylovMethod m : kAllKrylovMethods) {
    const SolverReport r = solve(m, A, Vector::Zero(10), nullptr, {});
    CHECK(r.x.isZero(0.0));
  }
}

TEST_CASE("breakdown returns the best iterate instead of throwing") {
  const DenseOperator zero(Matrix::Zero(5, 5));
  const Vector b = Vector::Ones(5);
  for (KrylovMethod m : kAllKrylovMethods) {
    CAPTURE(nameOf(m));
    const SolverReport r = solve(m, zero, b, nullptr, {});
    CHECK(!r.converged);
    CHECK(r.x.allFinite());
  }
}

TEST_CASE("solver names and trace CSV") {
  CHECK(krylovMethodFromName("bicgstab") == KrylovMethod::BICGSTAB);
  CHECK_THROWS_AS(krylovMethodFromName("jacobi"), ConfigError);
  const SolverReport r = solve(KrylovMethod::GMRES, IdentityOperator(3), Vector::Ones(3), nullptr, {});
  std::ostringstream os;
  writeTraceCsv(os, {r});
  CHECK(os.str().rfind("solver,iter,matvecs,residual,rmse,seconds\ngmres,0,0,", 0) == 0);
}

// -----------------------------------------------------------------------------
TEST_CASE("Lanczos recovers a known spectrum") {
  const Vector d = Vector::LinSpaced(100, 1.0, 100.0);
  const DenseOperator A(Matrix(d.asDiagonal()));
  Rng rng = makeRng(37, RandomStream::Lanczos);
  const EigenPairs ep = lanczosEigenpairs(A, 3, 100, rng, 1e-10);
  REQUIRE(ep.values.size() == 3);
  CHECK(ep.converged);
  CHECK(ep.values[0] == doctest::Approx(100.0).epsilon(1e-10));
  CHECK(ep.values[1] == doctest::Approx(99.0).epsilon(1e-10));
  CHECK(ep.values[2] == doctest::Approx(98.0).epsilon(1e-10));
  for (int k = 0; k < 3; ++k) CHECK(ep.residuals[k] <= 1e-8);
}

TEST_CASE("Lanczos Ritz values match the dense spectrum of the small Hessian") {
  const auto & a = smallAnalysis();
  const HessianOperator H(a.twin.problem, a.xa(), HessianVariant::SoaExact);
  const Matrix dense = assembleDenseOperator(H);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (dense + dense.transpose()), Eigen::EigenvaluesOnly);
  Rng rng = makeRng(38, RandomStream::Lanczos);
  const EigenPairs ep = lanczosEigenpairs(H, 5, 300, rng);
  const int n = static_cast<int>(es.eigenvalues().size());
  for (int k = 0; k < ep.values.size(); ++k) {
    CHECK(relDiff(ep.values[k], es.eigenvalues()[n - 1 - k]) <= 1e-6);
  }
  CHECK((ep.values.array() > 0.0).all());
}
