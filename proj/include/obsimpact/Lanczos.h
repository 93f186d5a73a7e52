/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_LANCZOS_H_
#define OBSIMPACT_LANCZOS_H_

#include "obsimpact/LinearOperator.h"
#include "obsimpact/Random.h"

namespace obsimpact {

struct EigenPairs {
  Vector values;      // descending
  Matrix vectors;     // column i belongs to values[i]
  Vector residuals;   // |A v - lambda v|
  int matvecs = 0;
  bool converged = false;
};

/// Leading k eigenpairs of a symmetric operator by Lanczos with full
/// reorthogonalization.  A pair is accepted when |A v - lambda v| <= tol
/// lambda_max.  Stops when all k pairs are accepted, the budget is spent or an
/// invariant subspace is found; `converged` tells which.
EigenPairs lanczosEigenpairs(const LinearOperator & A, int k, int maxMatvecs, Rng & rng,
                             double tol = 1.0e-6);

}  // namespace obsimpact

#endif  // OBSIMPACT_LANCZOS_H_
