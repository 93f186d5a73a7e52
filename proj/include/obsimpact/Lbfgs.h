/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_LBFGS_H_
#define OBSIMPACT_LBFGS_H_

#include <deque>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "obsimpact/FourDVar.h"

namespace obsimpact {

/// f(x), writing the gradient into g.
using Objective = std::function<double(const Vector & x, Vector & g)>;

struct CurvaturePair {
  Vector s;   // x_{k+1} - x_k
  Vector y;   // g_{k+1} - g_k
};

struct LbfgsOptions {
  int memory = 10;
  int max_iters = 400;
  double grad_tol_rel = 1.0e-10;   // relative to the initial gradient norm
  double grad_tol_abs = 0.0;
  double c1 = 1.0e-4;
  double c2 = 0.9;
  int max_line_search = 30;
  /// Initial inverse-Hessian shape P (scaled by s^T y / y^T P y); identity when empty.
  std::function<Vector(const Vector &)> initial_inverse;
};

struct MinimizerReport {
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> cost;        // iterations + 1 entries
  std::vector<double> grad_norm;   // iterations + 1 entries
  std::vector<CurvaturePair> pairs;
  Vector x;
  bool converged = false;
  bool line_search_failure = false;
  std::string message;

  double reduction() const {return grad_norm.front() / grad_norm.back();}
};

/// Limited-memory BFGS with a strong-Wolfe line search.  When function values
/// stop resolving the decrease (close to the minimum) the line search accepts
/// steps that satisfy the approximate Wolfe conditions of Hager and Zhang.
/// A failed line search stops the iteration and returns the best iterate.
MinimizerReport minimizeLbfgs(const Objective & f, const Vector & x0, const LbfgsOptions & opts = {});

/// Minimizes the 4D-Var cost from xStart.  Unless opts sets one, the initial
/// inverse Hessian is shaped by diag(B).
MinimizerReport minimize(const FourDVar & problem, const Vector & xStart, const LbfgsOptions & opts = {});

/// Two-loop recursion: approximate inverse Hessian applied to v.  The initial
/// matrix is gamma P with gamma = s^T y / y^T P y of the newest pair and P the
/// identity unless given.
Vector lbfgsTwoLoop(const std::vector<CurvaturePair> & pairs, const Vector & v,
                    const std::function<Vector(const Vector &)> & initialInverse = {});

/// CSV with header "iter,J,grad_norm".
void writeMinimizerCsv(std::ostream & os, const MinimizerReport & report);

}  // namespace obsimpact

#endif  // OBSIMPACT_LBFGS_H_
