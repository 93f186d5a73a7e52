/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Linearized.h"

#include <string>

#include "obsimpact/Errors.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
CheckpointStore::CheckpointStore(const ShallowWaterModel & model, const StateVector & x0,
                                 int nSteps)
  : q_(x0.q())
{
  if (nSteps < 0) throw ConfigError("n_steps must be >= 0");
  if (x0.q() != model.q()) throw DimensionMismatch("state grid does not match model grid");
  stages_.resize(nSteps);
  Vector current = x0.values();
  for (int k = 0; k < nSteps; ++k) {
    Vector next;
    try {
      model.advance(current, next, &stages_[k]);
    } catch (const Error & e) {
      throw PropagationError(e, k + 1);
    }
    current = std::move(next);
  }
  final_ = std::move(current);
}

// -----------------------------------------------------------------------------
LinearizedModel::LinearizedModel(const ShallowWaterModel & model,
                                 std::shared_ptr<const CheckpointStore> store)
  : model_(model), store_(std::move(store))
{
  if (!store_) throw ConfigError("linearized model needs a checkpoint store");
  if (store_->q() != model_.q()) throw DimensionMismatch("checkpoint grid does not match model");
}

// -----------------------------------------------------------------------------
void LinearizedModel::checkSteps(int nSteps) const {
  if (nSteps < 0 || nSteps > store_->nSteps()) {
    throw ConfigError("requested " + std::to_string(nSteps) + " steps but the checkpoint store holds " +
                      std::to_string(store_->nSteps()));
  }
}

// -----------------------------------------------------------------------------
void LinearizedModel::stepTL(int k, const Vector & dx, Vector & out, RkStages * tlStages) const {
  const RkStages & st = store_->stages(k);
  const double dt = model_.config().dt;
  Vector dk1, dk2, dk3, dk4;
  model_.tendencyTL(st[0], dx, dk1);
  Vector du2 = dx + 0.5 * dt * dk1;
  model_.tendencyTL(st[1], du2, dk2);
  Vector du3 = dx + 0.5 * dt * dk2;
  model_.tendencyTL(st[2], du3, dk3);
  Vector du4 = dx + dt * dk3;
  model_.tendencyTL(st[3], du4, dk4);
  out = dx + (dt / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4);
  if (tlStages) {
    (*tlStages)[0] = dx;
    (*tlStages)[1] = std::move(du2);
    (*tlStages)[2] = std::move(du3);
    (*tlStages)[3] = std::move(du4);
  }
}

// -----------------------------------------------------------------------------
void LinearizedModel::stepAD(int k, const Vector & lambda, Vector & out) const {
  const RkStages & st = store_->stages(k);
  const double dt = model_.config().dt;
  const int n = model_.size();

  Vector lu4 = Vector::Zero(n);
  model_.tendencyAD(st[3], (dt / 6.0) * lambda, lu4);
  Vector lk3 = (dt / 3.0) * lambda + dt * lu4;
  Vector lu3 = Vector::Zero(n);
  model_.tendencyAD(st[2], lk3, lu3);
  Vector lk2 = (dt / 3.0) * lambda + 0.5 * dt * lu3;
  Vector lu2 = Vector::Zero(n);
  model_.tendencyAD(st[1], lk2, lu2);
  Vector lk1 = (dt / 6.0) * lambda + 0.5 * dt * lu2;
  Vector lu1 = Vector::Zero(n);
  model_.tendencyAD(st[0], lk1, lu1);
  out = lambda + lu1 + lu2 + lu3 + lu4;
}

// -----------------------------------------------------------------------------
void LinearizedModel::stepSOA(int k, const RkStages & tl, const Vector & lambda,
                              const Vector & sigma, Vector & lambdaOut, Vector & sigmaOut) const {
  const RkStages & st = store_->stages(k);
  const double dt = model_.config().dt;
  const int n = model_.size();

  // stage 4
  const Vector lk4 = (dt / 6.0) * lambda;
  const Vector sk4 = (dt / 6.0) * sigma;
  Vector lu4 = Vector::Zero(n);
  Vector su4 = Vector::Zero(n);
  model_.tendencyAD(st[3], lk4, lu4);
  model_.tendencyAD(st[3], sk4, su4);
  model_.tendencySOA(st[3], tl[3], lk4, su4);
  // stage 3
  const Vector lk3 = (dt / 3.0) * lambda + dt * lu4;
  const Vector sk3 = (dt / 3.0) * sigma + dt * su4;
  Vector lu3 = Vector::Zero(n);
  Vector su3 = Vector::Zero(n);
  model_.tendencyAD(st[2], lk3, lu3);
  model_.tendencyAD(st[2], sk3, su3);
  model_.tendencySOA(st[2], tl[2], lk3, su3);
  // stage 2
  const Vector lk2 = (dt / 3.0) * lambda + 0.5 * dt * lu3;
  const Vector sk2 = (dt / 3.0) * sigma + 0.5 * dt * su3;
  Vector lu2 = Vector::Zero(n);
  Vector su2 = Vector::Zero(n);
  model_.tendencyAD(st[1], lk2, lu2);
  model_.tendencyAD(st[1], sk2, su2);
  model_.tendencySOA(st[1], tl[1], lk2, su2);
  // stage 1
  const Vector lk1 = (dt / 6.0) * lambda + 0.5 * dt * lu2;
  const Vector sk1 = (dt / 6.0) * sigma + 0.5 * dt * su2;
  Vector lu1 = Vector::Zero(n);
  Vector su1 = Vector::Zero(n);
  model_.tendencyAD(st[0], lk1, lu1);
  model_.tendencyAD(st[0], sk1, su1);
  model_.tendencySOA(st[0], tl[0], lk1, su1);

  lambdaOut = lambda + lu1 + lu2 + lu3 + lu4;
  sigmaOut = sigma + su1 + su2 + su3 + su4;
}

// -----------------------------------------------------------------------------
Vector LinearizedModel::tlm(const Vector & dx0, int nSteps) const {
  checkSteps(nSteps);
  if (dx0.size() != size()) throw DimensionMismatch("perturbation length mismatch");
  Vector dx = dx0;
  Vector next;
  for (int k = 0; k < nSteps; ++k) {
    stepTL(k, dx, next);
    dx.swap(next);
  }
  if (!dx.allFinite()) throw NonFiniteState("tangent-linear state contains NaN or Inf");
  return dx;
}

// -----------------------------------------------------------------------------
std::vector<Vector> LinearizedModel::tlmTrajectory(const Vector & dx0, int nSteps) const {
  checkSteps(nSteps);
  if (dx0.size() != size()) throw DimensionMismatch("perturbation length mismatch");
  std::vector<Vector> out;
  out.reserve(nSteps + 1);
  out.push_back(dx0);
  for (int k = 0; k < nSteps; ++k) {
    Vector next;
    stepTL(k, out.back(), next);
    out.push_back(std::move(next));
  }
  return out;
}

// -----------------------------------------------------------------------------
Vector LinearizedModel::foa(const Vector & lambdaF, int nSteps, const AdjointForcing & forcing) const {
  checkSteps(nSteps);
  if (lambdaF.size() != size()) throw DimensionMismatch("adjoint length mismatch");
  Vector lambda = lambdaF;
  if (forcing) forcing(nSteps, lambda);
  Vector prev;
  for (int k = nSteps - 1; k >= 0; --k) {
    stepAD(k, lambda, prev);
    lambda.swap(prev);
    if (forcing) forcing(k, lambda);
  }
  if (!lambda.allFinite()) throw NonFiniteState("adjoint state contains NaN or Inf");
  return lambda;
}

// -----------------------------------------------------------------------------
LinearizedModel::SecondOrderResult LinearizedModel::soa(const Vector & u, const Vector & lambdaF,
                                                        int nSteps, const AdjointForcing & forcing,
                                                        const SecondOrderForcing & secondForcing) const {
  checkSteps(nSteps);
  if (u.size() != size() || lambdaF.size() != size()) {
    throw DimensionMismatch("second-order adjoint input length mismatch");
  }
  std::vector<RkStages> tl(nSteps);
  Vector dx = u;
  Vector next;
  for (int k = 0; k < nSteps; ++k) {
    stepTL(k, dx, next, &tl[k]);
    dx.swap(next);
  }

  Vector lambda = lambdaF;
  Vector sigma = Vector::Zero(size());
  if (forcing) forcing(nSteps, lambda);
  if (secondForcing) secondForcing(nSteps, dx, sigma);
  Vector lambdaPrev, sigmaPrev;
  for (int k = nSteps - 1; k >= 0; --k) {
    stepSOA(k, tl[k], lambda, sigma, lambdaPrev, sigmaPrev);
    lambda.swap(lambdaPrev);
    sigma.swap(sigmaPrev);
    if (forcing) forcing(k, lambda);
    if (secondForcing) secondForcing(k, tl[k][0], sigma);
  }
  if (!sigma.allFinite() || !lambda.allFinite()) {
    throw NonFiniteState("second-order adjoint state contains NaN or Inf");
  }
  return {std::move(lambda), std::move(sigma)};
}

// -----------------------------------------------------------------------------
namespace {

std::shared_ptr<const CheckpointStore> storeFor(const ShallowWaterModel & model,
                                                const StateVector & x0, int nSteps,
                                                std::shared_ptr<const CheckpointStore> store) {
  if (!store) return std::make_shared<CheckpointStore>(model, x0, nSteps);
  if (store->q() != x0.q() || store->nSteps() < nSteps || store->state(0) != x0.values()) {
    throw TrajectoryMismatch("checkpoint store was not produced from the given initial state");
  }
  return store;
}

}  // namespace

Vector tlm(const StateVector & x0, const Vector & dx0, int nSteps, const ScenarioConfig & cfg,
           std::shared_ptr<const CheckpointStore> store) {
  ShallowWaterModel model(cfg);
  return LinearizedModel(model, storeFor(model, x0, nSteps, std::move(store))).tlm(dx0, nSteps);
}

Vector foa(const StateVector & x0, const Vector & lambdaF, int nSteps, const ScenarioConfig & cfg,
           std::shared_ptr<const CheckpointStore> store) {
  ShallowWaterModel model(cfg);
  return LinearizedModel(model, storeFor(model, x0, nSteps, std::move(store))).foa(lambdaF, nSteps);
}

Vector soa(const StateVector & x0, const Vector & u, const Vector & lambdaF, int nSteps,
           const ScenarioConfig & cfg, std::shared_ptr<const CheckpointStore> store) {
  ShallowWaterModel model(cfg);
  return LinearizedModel(model, storeFor(model, x0, nSteps, std::move(store)))
      .soa(u, lambdaF, nSteps).sigma0;
}

}  // namespace obsimpact
