/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Impact.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "obsimpact/Errors.h"
#include "obsimpact/FieldIO.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
ForecastScoreSpec ForecastScoreSpec::identity(const StateVector & verification, int steps) {
  ForecastScoreSpec s;
  s.verification = verification;
  s.steps = steps;
  return s;
}

void ForecastScoreSpec::validate() const {
  if (steps < 0) throw ConfigError("forecast length must be >= 0");
  if (weights.size() == 0) return;
  if (weights.size() != verification.size()) throw DimensionMismatch("score weights do not match the state");
  if ((weights.array() < 0.0).any()) throw ConfigError("score weights must be non-negative");
}

Vector subdomainMask(int q, int i0, int i1, int j0, int j1) {
  const StateLayout L(q);
  Vector w = Vector::Zero(L.size());
  for (int v = 0; v < 3; ++v) {
    for (int i = std::max(i0, 0); i < std::min(i1, q); ++i) {
      for (int j = std::max(j0, 0); j < std::min(j1, q); ++j) w[L.index(static_cast<Var>(v), i, j)] = 1.0;
    }
  }
  return w;
}

namespace {

Vector forecastError(const ScenarioConfig & cfg, const Vector & x0, const ForecastScoreSpec & spec,
                     std::shared_ptr<const CheckpointStore> * store) {
  spec.validate();
  if (x0.size() != spec.verification.size() || spec.verification.q() != cfg.q) {
    throw DimensionMismatch("forecast score state does not match the scenario grid");
  }
  ShallowWaterModel model(cfg);
  auto s = std::make_shared<const CheckpointStore>(model, StateVector(cfg.q, x0), spec.steps);
  Vector d = s->state(spec.steps) - spec.verification.values();
  if (store) *store = std::move(s);
  return d;
}

Vector weigh(const ForecastScoreSpec & spec, const Vector & d) {
  return spec.weights.size() == 0 ? d : Vector(spec.weights.cwiseProduct(d));
}

}  // namespace

double forecastScore(const ScenarioConfig & cfg, const Vector & x0, const ForecastScoreSpec & spec) {
  const Vector d = forecastError(cfg, x0, spec, nullptr);
  return d.dot(weigh(spec, d));
}

Vector scoreGradient(const ScenarioConfig & cfg, const Vector & x0, const ForecastScoreSpec & spec) {
  std::shared_ptr<const CheckpointStore> store;
  const Vector d = forecastError(cfg, x0, spec, &store);
  return LinearizedModel(ShallowWaterModel(cfg), store).foa(2.0 * weigh(spec, d), spec.steps);
}

SolverReport solveSupersensitivity(const LinearOperator & H, const Vector & rhs, KrylovMethod method,
                                   const LinearOperator * M, const SolveBudget & budget) {
  return solve(method, H, rhs, M, budget);
}

// -----------------------------------------------------------------------------
ImpactResult observationSensitivities(const FourDVar & problem, const Vector & xa0, const Vector & mu0) {
  if (mu0.size() != problem.size() || xa0.size() != problem.size()) {
    throw DimensionMismatch("sensitivity inputs do not match the problem size");
  }
  const ObservationSet & obs = problem.observations();
  ImpactResult res;
  res.mu0 = mu0;
  res.steps = obs.steps();
  const int last = obs.nTimes() > 0 ? obs.steps().back() : 0;
  const LinearizedModel tl(problem.model(), problem.checkpoints(xa0));
  const std::vector<Vector> dx = tl.tlmTrajectory(mu0, last);
  for (int k = 0; k < obs.nTimes(); ++k) {
    const Vector & mk = dx[obs.step(k)];
    res.mu.push_back(mk);
    res.obsSensitivity.push_back(obs.rInverse(k, obs.hApply(k, mk)));
  }
  res.backgroundSensitivity = problem.covariance().applyInverse(mu0);
  return res;
}

StateVector sensitivityField(const FourDVar & problem, const ImpactResult & result, int k) {
  return StateVector(problem.config().q, problem.observations().hTranspose(k, result.obsSensitivity.at(k)));
}

StateVector impactField(const FourDVar & problem, const ImpactResult & result, const Vector & xa0, int k) {
  const ObservationSet & obs = problem.observations();
  const Trajectory traj = problem.model().propagate(StateVector(problem.config().q, xa0), obs.step(k));
  const Vector departure = obs.values(k) - obs.hApply(k, traj.last().values());
  return StateVector(problem.config().q, obs.hTranspose(k, result.obsSensitivity.at(k).cwiseProduct(departure)));
}

Vector sensitivityMagnitude(const StateVector & field) {
  const int N = field.q() * field.q();
  Vector m = Vector::Zero(N);
  for (int v = 0; v < 3; ++v) m += field.field(static_cast<Var>(v)).cwiseAbs2();
  return m.cwiseSqrt();
}

// -----------------------------------------------------------------------------
std::vector<LocalMaximum> localMaxima(const Vector & cellField, int q) {
  if (cellField.size() != q * q) throw DimensionMismatch("cell field must have q^2 entries");
  std::vector<LocalMaximum> out;
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      const double c = cellField[i * q + j];
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const int a = i + di, b = j + dj;
          if ((di || dj) && a >= 0 && a < q && b >= 0 && b < q && !(c > cellField[a * q + b])) {
            peak = false;
            break;
          }
        }
      }
      if (peak) out.push_back({i, j, c});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto & x, const auto & y) {return x.value > y.value;});
  return out;
}

DominantPair dominantPair(const Vector & cellField, int q, double threshold) {
  const std::vector<LocalMaximum> peaks = localMaxima(cellField, q);
  DominantPair d;
  d.top.assign(peaks.begin(), peaks.begin() + std::min<size_t>(2, peaks.size()));
  if (peaks.size() < 2) return d;
  d.ratio = peaks.size() > 2 ? peaks[1].value / peaks[2].value : std::numeric_limits<double>::infinity();
  d.dominant = d.ratio >= threshold;
  return d;
}

// -----------------------------------------------------------------------------
void writeImpactFields(const std::string & dir, const FourDVar & problem, const ImpactResult & result) {
  const int q = problem.config().q;
  writeSwefFile(dir + "/mu0.swef", StateVector(q, result.mu0));
  writeSwefFile(dir + "/sens_background.swef", StateVector(q, result.backgroundSensitivity));
  for (size_t k = 0; k < result.steps.size(); ++k) {
    writeSwefFile(dir + "/sens_obs_step" + std::to_string(result.steps[k]) + ".swef",
                  sensitivityField(problem, result, static_cast<int>(k)));
  }
}

void writeImpactCsv(std::ostream & os, const FourDVar & problem, const ImpactResult & result) {
  const ObservationSet & obs = problem.observations();
  os << "step,var,i,j,sensitivity\n" << std::setprecision(17);
  for (int k = 0; k < obs.nTimes(); ++k) {
    const auto & sel = obs.selector(k);
    for (size_t m = 0; m < sel.size(); ++m) {
      os << obs.step(k) << ',' << varName(sel[m].var) << ',' << sel[m].i << ',' << sel[m].j << ','
         << result.obsSensitivity[k][m] << '\n';
    }
  }
}

}  // namespace obsimpact
