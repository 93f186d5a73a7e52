/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_KRYLOV_H_
#define OBSIMPACT_KRYLOV_H_

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "obsimpact/LinearOperator.h"

namespace obsimpact {

enum class KrylovMethod {CG, MINRES, GMRES, QMR, BICGSTAB, CGS, LSQR};

inline constexpr std::array<KrylovMethod, 7> kAllKrylovMethods = {
  KrylovMethod::CG, KrylovMethod::MINRES, KrylovMethod::GMRES, KrylovMethod::QMR,
  KrylovMethod::BICGSTAB, KrylovMethod::CGS, KrylovMethod::LSQR};

std::string_view krylovMethodName(KrylovMethod m);
KrylovMethod krylovMethodFromName(std::string_view name);
/// Operator applications per iteration (LSQR counts A and A^T).
int matvecsPerIteration(KrylovMethod m);

struct SolveBudget {
  int max_matvecs = 100;
  double residual_tol = 0.0;          // stop when |b - Ax| <= residual_tol |b|
  std::optional<Vector> reference;    // enables the per-iteration RMSE
  std::optional<Vector> x0;           // zero when absent
};

struct IterationRecord {
  int iter = 0;
  int matvecs = 0;
  double residual = 0.0;   // |b - A x_k|
  double rmse = 0.0;       // |x_k - reference| / sqrt(n), NaN without reference
  double seconds = 0.0;
};

struct SolverReport {
  std::string solver;
  std::vector<IterationRecord> trace;   // entry 0 describes the initial guess
  Vector x;
  Vector residual;                      // b - A x, from the solver's recurrences
  int matvecs = 0;
  bool converged = false;
  bool breakdown = false;
  std::string message;

  const IterationRecord & last() const {return trace.back();}
  /// Record after at most `matvecs` operator applications.
  const IterationRecord & atMatvecs(int matvecs) const;
};

/// Solves A x = b within the budget.  M, when given, applies the inverse of
/// the preconditioner: split symmetric form for CG and MINRES, left
/// preconditioning for GMRES, QMR, BiCGSTAB and CGS, right preconditioning for
/// LSQR.  QMR is the symmetric (coupled two-term) variant, one matvec per
/// iteration.  A breakdown returns the iterate with the smallest residual.
SolverReport solve(KrylovMethod method, const LinearOperator & A, const Vector & b,
                   const LinearOperator * M, const SolveBudget & budget);

/// CSV with header "solver,iter,matvecs,residual,rmse,seconds".
void writeTraceCsv(std::ostream & os, const std::vector<SolverReport> & reports);

}  // namespace obsimpact

#endif  // OBSIMPACT_KRYLOV_H_
