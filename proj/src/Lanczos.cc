/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Lanczos.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace obsimpact {

// -----------------------------------------------------------------------------
EigenPairs lanczosEigenpairs(const LinearOperator & A, int k, int maxMatvecs, Rng & rng, double tol) {
  const int n = A.size();
  if (k < 0 || k > n) throw ConfigError("requested " + std::to_string(k) + " eigenpairs of a size " +
                                        std::to_string(n) + " operator");
  EigenPairs out;
  if (k == 0) {
    out.vectors = Matrix(n, 0);
    out.converged = true;
    return out;
  }
  const int mMax = std::min(n, maxMatvecs);
  Matrix V(n, mMax + 1);
  std::vector<double> alpha, beta;
  Vector v = standardNormal(n, rng);
  V.col(0) = v / v.norm();

  Eigen::SelfAdjointEigenSolver<Matrix> es;
  auto ritz = [&](int m) {
    Matrix T = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    es.compute(T);
  };

  int m = 0;
  bool invariant = false;
  while (m < mMax) {
    Vector w = A.apply(V.col(m));
    ++out.matvecs;
    alpha.push_back(V.col(m).dot(w));
    // Full reorthogonalization, two passes of classical Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      w -= V.leftCols(m + 1) * (V.leftCols(m + 1).transpose() * w);
    }
    const double b = w.norm();
    beta.push_back(b);
    ++m;
    if (m >= k) {
      ritz(m);
      const double lmax = std::max(std::abs(es.eigenvalues()[m - 1]), std::abs(es.eigenvalues()[0]));
      bool all = true;
      for (int i = 0; i < k && all; ++i) {
        all = std::abs(b * es.eigenvectors()(m - 1, m - 1 - i)) <= tol * lmax;
      }
      if (all) break;
    }
    if (b <= 1.0e-12 * std::abs(alpha.back()) || b == 0.0) {
      invariant = true;
      break;
    }
    V.col(m) = w / b;
  }

  ritz(m);
  const int kk = std::min(k, m);
  out.values.resize(kk);
  out.vectors.resize(n, kk);
  out.residuals.resize(kk);
  const double lmax = std::max(std::abs(es.eigenvalues()[m - 1]), std::abs(es.eigenvalues()[0]));
  bool all = kk == k;
  for (int i = 0; i < kk; ++i) {
    const int col = m - 1 - i;
    out.values[i] = es.eigenvalues()[col];
    out.vectors.col(i) = V.leftCols(m) * es.eigenvectors().col(col);
    out.residuals[i] = std::abs(beta[m - 1] * es.eigenvectors()(m - 1, col));
    if (invariant) out.residuals[i] = 0.0;
    all = all && out.residuals[i] <= tol * lmax;
  }
  out.converged = all;
  return out;
}

}  // namespace obsimpact
