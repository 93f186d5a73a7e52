/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/FourDVar.h"

#include <algorithm>
#include <string>

#include "obsimpact/Errors.h"
#include "obsimpact/Parallel.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
FourDVar::FourDVar(const ScenarioConfig & cfg, std::shared_ptr<const BackgroundCovariance> B,
                   Vector background, std::shared_ptr<const ObservationSet> obs)
  : model_(cfg), B_(std::move(B)), xb_(std::move(background)), obs_(std::move(obs)),
    window_(cfg.n_steps_window)
{
  if (!B_ || !obs_) throw ConfigError("4D-Var needs a background covariance and observations");
  if (B_->q() != cfg.q || obs_->q() != cfg.q) throw DimensionMismatch("4D-Var components on different grids");
  if (xb_.size() != cfg.n()) throw DimensionMismatch("background length mismatch");
  timeOfStep_.assign(window_ + 1, -1);
  for (int t = 0; t < obs_->nTimes(); ++t) {
    const int s = obs_->step(t);
    if (s < 0 || s > window_) {
      throw ConfigError("observation step " + std::to_string(s) + " outside the assimilation window");
    }
    timeOfStep_[s] = t;
  }
}

// -----------------------------------------------------------------------------
double FourDVar::observationTerm(int t, const Vector & xk) const {
  const Vector d = obs_->hApply(t, xk) - obs_->values(t);
  return 0.5 * d.dot(obs_->rInverse(t, d));
}

Vector FourDVar::weightedInnovation(int t, const Vector & xk) const {
  const Vector d = obs_->hApply(t, xk) - obs_->values(t);
  return obs_->hTranspose(t, obs_->rInverse(t, d));
}

Vector FourDVar::weightedSelection(int t, const Vector & dx) const {
  return obs_->hTranspose(t, obs_->rInverse(t, obs_->hApply(t, dx)));
}

// -----------------------------------------------------------------------------
CostEvaluation FourDVar::cost(const Vector & x0) const {
  if (x0.size() != size()) throw DimensionMismatch("state length mismatch in cost");
  CostEvaluation ce;
  const Vector dxb = x0 - xb_;
  ce.j_background = 0.5 * dxb.dot(B_->applyInverse(dxb));
  Vector x = x0, next;
  for (int k = 0; k <= window_; ++k) {
    if (timeOfStep_[k] >= 0) ce.j_observation += observationTerm(timeOfStep_[k], x);
    if (k == window_) break;
    try {
      model_.advance(x, next);
    } catch (const Error & e) {
      throw PropagationError(e, k + 1);
    }
    x.swap(next);
  }
  ce.j_total = ce.j_background + ce.j_observation;
  return ce;
}

// -----------------------------------------------------------------------------
std::shared_ptr<const CheckpointStore> FourDVar::checkpoints(const Vector & x0) const {
  if (x0.size() != size()) throw DimensionMismatch("state length mismatch");
  return std::make_shared<CheckpointStore>(model_, StateVector(config().q, x0), window_);
}

CostEvaluation FourDVar::costGrad(const Vector & x0) const {
  return costGrad(x0, *checkpoints(x0));
}

CostEvaluation FourDVar::costGrad(const Vector & x0, const CheckpointStore & store) const {
  if (store.nSteps() < window_ || store.state(0) != x0) {
    throw TrajectoryMismatch("checkpoint store does not start from the evaluated state");
  }
  CostEvaluation ce;
  const Vector dxb = x0 - xb_;
  const Vector binv = B_->applyInverse(dxb);
  ce.j_background = 0.5 * dxb.dot(binv);
  for (int k = 0; k <= window_; ++k) {
    if (timeOfStep_[k] >= 0) ce.j_observation += observationTerm(timeOfStep_[k], store.state(k));
  }
  ce.j_total = ce.j_background + ce.j_observation;

  // Non-owning alias: the store outlives this sweep.
  LinearizedModel lin(model_, std::shared_ptr<const CheckpointStore>(&store, [](const CheckpointStore *) {}));
  const Vector lambda0 = lin.foa(Vector::Zero(size()), window_, [&](int k, Vector & lambda) {
    if (timeOfStep_[k] >= 0) lambda += weightedInnovation(timeOfStep_[k], store.state(k));
  });
  ce.gradient = binv + lambda0;
  return ce;
}

// -----------------------------------------------------------------------------
std::string_view hessianVariantName(HessianVariant v) {
  switch (v) {
    case HessianVariant::SoaExact: return "soa";
    case HessianVariant::GaussNewton: return "gauss-newton";
    case HessianVariant::FiniteDifference: return "finite-difference";
  }
  return "?";
}

HessianVariant hessianVariantFromName(std::string_view name) {
  for (HessianVariant v : {HessianVariant::SoaExact, HessianVariant::GaussNewton,
                           HessianVariant::FiniteDifference}) {
    if (name == hessianVariantName(v)) return v;
  }
  throw ConfigError("unknown Hessian variant '" + std::string(name) +
                    "' (expected soa, gauss-newton or finite-difference)");
}

// -----------------------------------------------------------------------------
HessianOperator::HessianOperator(std::shared_ptr<const FourDVar> problem, const Vector & x0,
                                 HessianVariant variant, double fdEpsilon)
  : problem_(std::move(problem)), x_(x0), variant_(variant), fdEpsilon_(fdEpsilon)
{
  if (!problem_) throw ConfigError("Hessian operator needs a 4D-Var problem");
  if (x_.size() != problem_->size()) throw DimensionMismatch("linearization point length mismatch");
  store_ = problem_->checkpoints(x_);
  linear_ = std::make_unique<LinearizedModel>(problem_->model(), store_);
  const ObservationSet & obs = problem_->observations();
  for (int t = 0; t < obs.nTimes(); ++t) {
    innovations_.push_back(problem_->weightedInnovation(t, store_->state(obs.step(t))));
  }
  if (variant_ == HessianVariant::FiniteDifference) {
    gradient_ = *problem_->costGrad(x_, *store_).gradient;
  }
}

// -----------------------------------------------------------------------------
Vector HessianOperator::apply(const Vector & u) const {
  checkSize(u);
  ++count_;
  switch (variant_) {
    case HessianVariant::SoaExact: return applySoa(u);
    case HessianVariant::GaussNewton: return applyGaussNewton(u);
    case HessianVariant::FiniteDifference: return applyFiniteDifference(u);
  }
  return Vector();
}

// -----------------------------------------------------------------------------
Vector HessianOperator::applySoa(const Vector & u) const {
  const FourDVar & p = *problem_;
  const auto res = linear_->soa(
      u, Vector::Zero(size()), p.windowSteps(),
      [&](int k, Vector & lambda) {
        const int t = p.timeAtStep(k);
        if (t >= 0) lambda += innovations_[t];
      },
      [&](int k, const Vector & dxk, Vector & sigma) {
        const int t = p.timeAtStep(k);
        if (t >= 0) sigma += p.weightedSelection(t, dxk);
      });
  return p.covariance().applyInverse(u) + res.sigma0;
}

// -----------------------------------------------------------------------------
Vector HessianOperator::applyGaussNewton(const Vector & u) const {
  const FourDVar & p = *problem_;
  const int n = p.windowSteps();
  std::vector<Vector> forcing(n + 1);
  Vector dx = u, next;
  for (int k = 0; k <= n; ++k) {
    const int t = p.timeAtStep(k);
    if (t >= 0) forcing[k] = p.weightedSelection(t, dx);
    if (k == n) break;
    linear_->stepTL(k, dx, next);
    dx.swap(next);
  }
  const Vector lambda0 = linear_->foa(Vector::Zero(size()), n, [&](int k, Vector & lambda) {
    if (forcing[k].size() > 0) lambda += forcing[k];
  });
  return p.covariance().applyInverse(u) + lambda0;
}

// -----------------------------------------------------------------------------
Vector HessianOperator::applyFiniteDifference(const Vector & u) const {
  const double un = u.norm();
  if (un == 0.0) return Vector::Zero(size());
  const double eps = fdEpsilon_ > 0.0 ? fdEpsilon_ : 1.0e-6 * std::max(x_.norm(), 1.0) / un;
  const Vector xp = x_ + eps * u;
  const Vector out = (*problem_->costGrad(xp).gradient - gradient_) / eps;
  if (out.norm() < 1.0e-13) stepTooSmall_ = true;
  return out;
}

// -----------------------------------------------------------------------------
Matrix assembleDenseOperator(const LinearOperator & A, int jobs) {
  const int n = A.size();
  if (n > 6000) throw SizeGuard("dense assembly refused for n = " + std::to_string(n) + " > 6000");
  Matrix out(n, n);
  parallelFor(n, jobs, [&](int i) {
    Vector e = Vector::Zero(n);
    e[i] = 1.0;
    out.col(i) = A.apply(e);
  });
  return out;
}

}  // namespace obsimpact
