/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Krylov.h"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <utility>

#include "obsimpact/Errors.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
std::string_view krylovMethodName(KrylovMethod m) {
  switch (m) {
    case KrylovMethod::CG: return "cg";
    case KrylovMethod::MINRES: return "minres";
    case KrylovMethod::GMRES: return "gmres";
    case KrylovMethod::QMR: return "qmr";
    case KrylovMethod::BICGSTAB: return "bicgstab";
    case KrylovMethod::CGS: return "cgs";
    case KrylovMethod::LSQR: return "lsqr";
  }
  return "?";
}

KrylovMethod krylovMethodFromName(std::string_view name) {
  for (KrylovMethod m : kAllKrylovMethods) {
    if (name == krylovMethodName(m)) return m;
  }
  throw ConfigError("unknown solver '" + std::string(name) +
                    "' (expected cg, minres, gmres, qmr, bicgstab, cgs or lsqr)");
}

int matvecsPerIteration(KrylovMethod m) {
  switch (m) {
    case KrylovMethod::BICGSTAB:
    case KrylovMethod::CGS:
    case KrylovMethod::LSQR:
      return 2;
    default:
      return 1;
  }
}

const IterationRecord & SolverReport::atMatvecs(int matvecs) const {
  const IterationRecord * best = &trace.front();
  for (const IterationRecord & r : trace) {
    if (r.matvecs <= matvecs) best = &r;
  }
  return *best;
}

namespace {

// -----------------------------------------------------------------------------
/// Budget, trace and best-iterate bookkeeping shared by the solvers.
class Run {
 public:
  Run(KrylovMethod method, const LinearOperator & A, const Vector & b, const LinearOperator * M,
      const SolveBudget & budget)
    : A_(A), M_(M), b_(b), budget_(budget), start_(std::chrono::steady_clock::now()),
      bnorm_(b.norm())
  {
    report_.solver = std::string(krylovMethodName(method));
    if (b.size() != A.size()) throw DimensionMismatch("right-hand side length does not match operator");
    if (M && M->size() != A.size()) throw DimensionMismatch("preconditioner size does not match operator");
    if (budget.max_matvecs < 1) throw ConfigError("max_matvecs must be >= 1");
    if (budget.reference && budget.reference->size() != b.size()) {
      throw DimensionMismatch("reference solution length mismatch");
    }
    if (budget.x0 && budget.x0->size() != b.size()) throw DimensionMismatch("initial guess length mismatch");
  }

  bool afford(int k) const {return report_.matvecs + k <= budget_.max_matvecs;}
  int maxMatvecs() const {return budget_.max_matvecs;}
  Vector A(const Vector & v) {++report_.matvecs; return A_.apply(v);}
  Vector At(const Vector & v) {++report_.matvecs; return A_.applyTranspose(v);}
  Vector M(const Vector & v) const {return M_ ? M_->apply(v) : v;}
  Vector Mt(const Vector & v) const {return M_ ? M_->applyTranspose(v) : v;}

  /// Initial guess and its residual b - A x0.
  std::pair<Vector, Vector> start() {
    if (budget_.x0 && budget_.x0->squaredNorm() > 0.0) {
      return {*budget_.x0, b_ - A(*budget_.x0)};
    }
    return {Vector::Zero(b_.size()), b_};
  }

  /// Appends a trace entry; true once the residual target is met.
  bool record(int iter, const Vector & x, Vector r) {
    const double residual = r.norm();
    IterationRecord rec;
    rec.iter = iter;
    rec.matvecs = report_.matvecs;
    rec.residual = residual;
    rec.rmse = budget_.reference ? (x - *budget_.reference).norm() / std::sqrt(double(x.size()))
                                 : std::numeric_limits<double>::quiet_NaN();
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    report_.trace.push_back(rec);
    if (std::isfinite(residual) && (best_.size() == 0 || residual < bestResidual_)) {
      best_ = x;
      bestR_ = r;
      bestResidual_ = residual;
    }
    lastR_ = std::move(r);
    const double target = std::max(budget_.residual_tol, 1.0e-14) * bnorm_;
    return residual <= target;
  }

  SolverReport finish(Vector x, bool converged, std::string message = {}) {
    report_.x = std::move(x);
    report_.residual = std::move(lastR_);
    report_.converged = converged;
    report_.message = message.empty() ? (converged ? "converged" : "budget exhausted") : std::move(message);
    return std::move(report_);
  }

  SolverReport breakdown(std::string message) {
    report_.x = best_.size() > 0 ? best_ : Vector::Zero(b_.size());
    report_.residual = bestR_.size() > 0 ? bestR_ : b_;
    report_.breakdown = true;
    report_.message = "breakdown: " + std::move(message);
    return std::move(report_);
  }

  const Vector & b() const {return b_;}
  bool preconditioned() const {return M_ != nullptr;}

 private:
  const LinearOperator & A_;
  const LinearOperator * M_;
  const Vector & b_;
  const SolveBudget & budget_;
  std::chrono::steady_clock::time_point start_;
  double bnorm_;
  SolverReport report_;
  Vector best_;
  Vector bestR_;
  Vector lastR_;
  double bestResidual_ = 0.0;
};

// -----------------------------------------------------------------------------
SolverReport solveCg(Run & run) {
  auto [x, r] = run.start();
  if (run.record(0, x, r)) return run.finish(x, true);
  Vector z = run.M(r);
  double rz = r.dot(z);
  if (!(rz > 0.0)) return run.breakdown("preconditioner is not positive definite");
  Vector p = z;
  for (int it = 1; run.afford(1); ++it) {
    const Vector q = run.A(p);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) return run.breakdown("non-positive curvature p^T A p");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    if (run.record(it, x, r)) return run.finish(x, true);
    z = run.M(r);
    const double rzNew = r.dot(z);
    if (!(rzNew > 0.0)) return run.breakdown("preconditioner is not positive definite");
    p = z + (rzNew / rz) * p;
    rz = rzNew;
  }
  return run.finish(x, false);
}

// -----------------------------------------------------------------------------
// Preconditioned MINRES (Paige & Saunders), with A x carried along so the true
// residual is available without extra products.
SolverReport solveMinres(Run & run) {
  auto [x, r1] = run.start();
  Vector Ax = run.b() - r1;
  if (run.record(0, x, r1)) return run.finish(x, true);
  Vector y = run.M(r1);
  double beta = r1.dot(y);
  if (!(beta > 0.0)) return run.breakdown("preconditioner is not positive definite");
  beta = std::sqrt(beta);
  const int n = static_cast<int>(x.size());
  Vector r2 = r1;
  double oldb = 0.0, dbar = 0.0, epsln = 0.0, phibar = beta, cs = -1.0, sn = 0.0;
  Vector w = Vector::Zero(n), w2 = Vector::Zero(n), Aw = Vector::Zero(n), Aw2 = Vector::Zero(n);
  for (int it = 1; run.afford(1); ++it) {
    const Vector v = y / beta;
    const Vector Av = run.A(v);
    y = Av;
    if (it >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = run.M(r2);
    oldb = beta;
    const double beta2 = r2.dot(y);
    if (beta2 < 0.0) return run.breakdown("preconditioner is not positive definite");
    beta = std::sqrt(beta2);
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::epsilon());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    Vector wNew = (v - oldeps * w2 - delta * w) / gamma;
    Vector AwNew = (Av - oldeps * Aw2 - delta * Aw) / gamma;
    w2 = std::move(w);
    w = std::move(wNew);
    Aw2 = std::move(Aw);
    Aw = std::move(AwNew);
    x += phi * w;
    Ax += phi * Aw;
    if (run.record(it, x, run.b() - Ax)) return run.finish(x, true);
    if (beta == 0.0) return run.finish(x, false, "Krylov space exhausted");
  }
  return run.finish(x, false);
}

// -----------------------------------------------------------------------------
// Full GMRES, left preconditioned, modified Gram-Schmidt with one
// reorthogonalization pass.  A v_j is kept so the true residual of every
// iterate costs no extra products.
SolverReport solveGmres(Run & run) {
  auto [x0, r0] = run.start();
  const Vector Ax0 = run.b() - r0;
  if (run.record(0, x0, r0)) return run.finish(x0, true);
  const Vector z0 = run.M(r0);
  const double beta = z0.norm();
  if (beta == 0.0) return run.breakdown("preconditioned residual vanished");
  std::vector<Vector> V{z0 / beta}, AV;
  const int m = run.maxMatvecs() + 1;
  Matrix H = Matrix::Zero(m + 1, m);
  std::vector<double> cs, sn;
  Vector g = Vector::Zero(m + 1);
  g[0] = beta;
  Vector x = x0;
  for (int j = 0; run.afford(1); ++j) {
    AV.push_back(run.A(V[j]));
    Vector w = run.M(AV[j]);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const double h = w.dot(V[i]);
        H(i, j) += h;
        w -= h * V[i];
      }
    }
    const double hnext = w.norm();
    H(j + 1, j) = hnext;
    for (int i = 0; i < j; ++i) {
      const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
      H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
      H(i, j) = t;
    }
    const double rho = std::hypot(H(j, j), H(j + 1, j));
    if (rho == 0.0) return run.breakdown("singular Hessenberg matrix");
    cs.push_back(H(j, j) / rho);
    sn.push_back(H(j + 1, j) / rho);
    H(j, j) = rho;
    H(j + 1, j) = 0.0;
    g[j + 1] = -sn[j] * g[j];
    g[j] = cs[j] * g[j];

    const Vector yk = H.topLeftCorner(j + 1, j + 1).triangularView<Eigen::Upper>().solve(g.head(j + 1));
    x = x0;
    Vector Ax = Ax0;
    for (int i = 0; i <= j; ++i) {
      x += yk[i] * V[i];
      Ax += yk[i] * AV[i];
    }
    if (run.record(j + 1, x, run.b() - Ax)) return run.finish(x, true);
    if (hnext <= 1.0e-14 * beta) return run.finish(x, false, "Krylov space exhausted");
    V.push_back(w / hnext);
  }
  return run.finish(x, false);
}

// -----------------------------------------------------------------------------
// Symmetric QMR (Freund & Nachtigal) with the preconditioner applied on the
// left of the coupled two-term recurrences.
SolverReport solveQmr(Run & run) {
  auto [x, r] = run.start();
  Vector Ax = run.b() - r;
  if (run.record(0, x, r)) return run.finish(x, true);
  Vector t = run.M(r);
  double tau = t.norm();
  Vector q = t;
  double theta = 0.0;
  double rho = r.dot(q);
  if (rho == 0.0) return run.breakdown("r^T M r = 0");
  const int n = static_cast<int>(x.size());
  Vector d = Vector::Zero(n), Ad = Vector::Zero(n);
  for (int it = 1; run.afford(1); ++it) {
    const Vector Aq = run.A(q);
    const double sigma = q.dot(Aq);
    if (sigma == 0.0) return run.breakdown("q^T A q = 0");
    const double alpha = rho / sigma;
    r -= alpha * Aq;
    t = run.M(r);
    const double thetaOld = theta;
    theta = t.norm() / tau;
    const double c = 1.0 / std::sqrt(1.0 + theta * theta);
    tau *= theta * c;
    const double keep = c * c * thetaOld * thetaOld;
    d = keep * d + (c * c * alpha) * q;
    Ad = keep * Ad + (c * c * alpha) * Aq;
    x += d;
    Ax += Ad;
    if (run.record(it, x, run.b() - Ax)) return run.finish(x, true);
    const double rhoNew = r.dot(t);
    if (rhoNew == 0.0) return run.breakdown("r^T M r = 0");
    q = t + (rhoNew / rho) * q;
    rho = rhoNew;
  }
  return run.finish(x, false);
}

// -----------------------------------------------------------------------------
SolverReport solveBicgstab(Run & run) {
  auto [x, r0] = run.start();
  Vector Ax = run.b() - r0;
  if (run.record(0, x, r0)) return run.finish(x, true);
  Vector r = run.M(r0);
  const Vector rhat = r;
  const int n = static_cast<int>(x.size());
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  Vector v = Vector::Zero(n), p = Vector::Zero(n);
  for (int it = 1; run.afford(2); ++it) {
    const double rhoNew = rhat.dot(r);
    if (rhoNew == 0.0) return run.breakdown("rho = 0");
    const double beta = (rhoNew / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    const Vector Ap = run.A(p);
    v = run.M(Ap);
    const double den = rhat.dot(v);
    if (den == 0.0) return run.breakdown("rhat^T v = 0");
    alpha = rhoNew / den;
    const Vector s = r - alpha * v;
    if (s.squaredNorm() == 0.0) {
      x += alpha * p;
      Ax += alpha * Ap;
      run.record(it, x, run.b() - Ax);
      return run.finish(x, true);
    }
    const Vector As = run.A(s);
    const Vector t = run.M(As);
    const double tt = t.squaredNorm();
    if (tt == 0.0) return run.breakdown("t = 0");
    omega = t.dot(s) / tt;
    x += alpha * p + omega * s;
    Ax += alpha * Ap + omega * As;
    r = s - omega * t;
    if (run.record(it, x, run.b() - Ax)) return run.finish(x, true);
    if (omega == 0.0) return run.breakdown("omega = 0");
    rho = rhoNew;
  }
  return run.finish(x, false);
}

// -----------------------------------------------------------------------------
SolverReport solveCgs(Run & run) {
  auto [x, r0] = run.start();
  Vector Ax = run.b() - r0;
  if (run.record(0, x, r0)) return run.finish(x, true);
  Vector r = run.M(r0);
  const Vector rhat = r;
  Vector u = r, p = r;
  double rho = rhat.dot(r);
  if (rho == 0.0) return run.breakdown("rho = 0");
  for (int it = 1; run.afford(2); ++it) {
    const Vector v = run.M(run.A(p));
    const double sigma = rhat.dot(v);
    if (sigma == 0.0) return run.breakdown("rhat^T v = 0");
    const double alpha = rho / sigma;
    const Vector q = u - alpha * v;
    const Vector w = u + q;
    const Vector Aw = run.A(w);
    x += alpha * w;
    Ax += alpha * Aw;
    r -= alpha * run.M(Aw);
    if (run.record(it, x, run.b() - Ax)) return run.finish(x, true);
    const double rhoNew = rhat.dot(r);
    if (rhoNew == 0.0) return run.breakdown("rho = 0");
    const double beta = rhoNew / rho;
    rho = rhoNew;
    u = r + beta * q;
    p = u + beta * (q + beta * p);
  }
  return run.finish(x, false);
}

// -----------------------------------------------------------------------------
// LSQR (Paige & Saunders) on A M y = b, x = x0 + M y.
SolverReport solveLsqr(Run & run) {
  auto [x0, r0] = run.start();
  const Vector Ax0 = run.b() - r0;
  if (run.record(0, x0, r0)) return run.finish(x0, true);
  double beta = r0.norm();
  Vector u = r0 / beta;
  if (!run.afford(1)) return run.finish(x0, false);
  Vector v = run.Mt(run.At(u));
  double alpha = v.norm();
  if (alpha == 0.0) return run.finish(x0, false, "A^T b = 0; no progress possible");
  v /= alpha;
  const int n = static_cast<int>(x0.size());
  Vector w = v, y = Vector::Zero(n), Ay = Vector::Zero(n), Aw = Vector::Zero(n);
  double phibar = beta, rhobar = alpha, coef = 0.0;
  Vector x = x0;
  for (int it = 1; run.afford(2); ++it) {
    const Vector Av = run.A(run.M(v));
    Aw = Av - coef * Aw;
    u = Av - alpha * u;
    beta = u.norm();
    if (beta > 0.0) u /= beta;
    v = run.Mt(run.At(u)) - beta * v;
    alpha = v.norm();
    if (alpha > 0.0) v /= alpha;
    const double rho = std::hypot(rhobar, beta);
    const double c = rhobar / rho, s = beta / rho;
    const double theta = s * alpha;
    rhobar = -c * alpha;
    const double phi = c * phibar;
    phibar = s * phibar;
    y += (phi / rho) * w;
    Ay += (phi / rho) * Aw;
    coef = theta / rho;
    w = v - coef * w;
    x = x0 + run.M(y);
    if (run.record(it, x, run.b() - Ax0 - Ay)) return run.finish(x, true);
    if (beta == 0.0 || alpha == 0.0) return run.finish(x, false, "bidiagonalization terminated");
  }
  return run.finish(x, false);
}

}  // namespace

// -----------------------------------------------------------------------------
SolverReport solve(KrylovMethod method, const LinearOperator & A, const Vector & b,
                   const LinearOperator * M, const SolveBudget & budget) {
  Run run(method, A, b, M, budget);
  switch (method) {
    case KrylovMethod::CG: return solveCg(run);
    case KrylovMethod::MINRES: return solveMinres(run);
    case KrylovMethod::GMRES: return solveGmres(run);
    case KrylovMethod::QMR: return solveQmr(run);
    case KrylovMethod::BICGSTAB: return solveBicgstab(run);
    case KrylovMethod::CGS: return solveCgs(run);
    case KrylovMethod::LSQR: return solveLsqr(run);
  }
  throw ConfigError("unknown Krylov method");
}

// -----------------------------------------------------------------------------
void writeTraceCsv(std::ostream & os, const std::vector<SolverReport> & reports) {
  os << "solver,iter,matvecs,residual,rmse,seconds\n" << std::setprecision(17);
  for (const SolverReport & rep : reports) {
    for (const IterationRecord & r : rep.trace) {
      os << rep.solver << ',' << r.iter << ',' << r.matvecs << ',' << r.residual << ',' << r.rmse
         << ',' << r.seconds << '\n';
    }
  }
}

}  // namespace obsimpact
