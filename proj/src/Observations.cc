/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Observations.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "obsimpact/Errors.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
ObservationSet::ObservationSet(int q, std::vector<int> steps,
                               std::vector<std::vector<ObsSite>> selectors,
                               std::vector<Vector> values, std::vector<Vector> sigmas)
  : q_(q), steps_(std::move(steps)), selectors_(std::move(selectors)),
    values_(std::move(values)), sigmas_(std::move(sigmas))
{
  const std::size_t nt = steps_.size();
  if (selectors_.size() != nt || values_.size() != nt || sigmas_.size() != nt) {
    throw DimensionMismatch("observation times, selectors, values and sigmas disagree in length");
  }
  const StateLayout layout(q_);
  flat_.resize(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    if (k > 0 && steps_[k] <= steps_[k - 1]) throw ConfigError("observation steps must increase");
    const auto & sel = selectors_[k];
    if (values_[k].size() != static_cast<long>(sel.size()) ||
        sigmas_[k].size() != static_cast<long>(sel.size())) {
      throw DimensionMismatch("observation values/sigmas length differs from selector length");
    }
    if (!values_[k].allFinite()) throw NonFiniteState("observation values must be finite");
    if ((sigmas_[k].array() <= 0.0).any()) throw ConfigError("observation sigmas must be positive");
    flat_[k].reserve(sel.size());
    for (const ObsSite & s : sel) {
      if (!layout.inside(s.i, s.j)) {
        throw IndexOutOfRange("observation site (" + std::to_string(s.i) + "," +
                              std::to_string(s.j) + ") outside the grid");
      }
      flat_[k].push_back(layout.index(s.var, s.i, s.j));
    }
  }
}

// -----------------------------------------------------------------------------
int ObservationSet::totalCount() const {
  int total = 0;
  for (const auto & s : selectors_) total += static_cast<int>(s.size());
  return total;
}

std::optional<int> ObservationSet::timeAtStep(int step) const {
  const auto it = std::find(steps_.begin(), steps_.end(), step);
  if (it == steps_.end()) return std::nullopt;
  return static_cast<int>(it - steps_.begin());
}

void ObservationSet::checkTime(int k) const {
  if (k < 0 || k >= nTimes()) {
    throw IndexOutOfRange("observation time index " + std::to_string(k) + " out of range");
  }
}

// -----------------------------------------------------------------------------
Vector ObservationSet::hApply(int k, const Vector & x) const {
  checkTime(k);
  if (x.size() != 3 * q_ * q_) throw DimensionMismatch("state length mismatch in H");
  const auto & idx = flat_[k];
  Vector out(idx.size());
  for (std::size_t m = 0; m < idx.size(); ++m) out[m] = x[idx[m]];
  return out;
}

Vector ObservationSet::hTranspose(int k, const Vector & w) const {
  Vector out = Vector::Zero(3 * q_ * q_);
  hTransposeAdd(k, w, out);
  return out;
}

void ObservationSet::hTransposeAdd(int k, const Vector & w, Vector & out) const {
  checkTime(k);
  const auto & idx = flat_[k];
  if (w.size() != static_cast<long>(idx.size())) {
    throw DimensionMismatch("observation-space vector length mismatch in H^T");
  }
  for (std::size_t m = 0; m < idx.size(); ++m) out[idx[m]] += w[m];
}

Vector ObservationSet::rInverse(int k, const Vector & w) const {
  checkTime(k);
  if (w.size() != sigmas_[k].size()) {
    throw DimensionMismatch("observation-space vector length mismatch in R^{-1}");
  }
  return w.array() / sigmas_[k].array().square();
}

// -----------------------------------------------------------------------------
ObservationSet ObservationSet::withValues(std::vector<Vector> values) const {
  return ObservationSet(q_, steps_, selectors_, std::move(values), sigmas_);
}

// -----------------------------------------------------------------------------
std::vector<int> observationSteps(const ScenarioConfig & cfg) {
  std::vector<int> steps;
  if (cfg.obs_at_initial_time) steps.push_back(0);
  for (int s = cfg.obs_every; s <= cfg.n_steps_window; s += cfg.obs_every) steps.push_back(s);
  return steps;
}

std::vector<ObsSite> observationNetwork(int q, int stride) {
  std::vector<ObsSite> sites;
  for (Var v : {Var::H, Var::UH, Var::VH}) {
    for (int i = 0; i < q; i += stride) {
      for (int j = 0; j < q; j += stride) sites.push_back({v, i, j});
    }
  }
  return sites;
}

// -----------------------------------------------------------------------------
ObservationErrorModel observationErrors(const Trajectory & reference, const ScenarioConfig & cfg,
                                        const std::vector<ObsSite> & network) {
  std::array<double, 3> largest = {0.0, 0.0, 0.0};
  for (int step : observationSteps(cfg)) {
    if (step > reference.nSteps()) throw ConfigError("reference trajectory shorter than the window");
    const StateVector & x = reference.states[step];
    for (const ObsSite & s : network) {
      double & l = largest[static_cast<int>(s.var)];
      l = std::max(l, std::abs(x(s.var, s.i, s.j)));
    }
  }
  ObservationErrorModel model;
  for (int v = 0; v < 3; ++v) model.sigma[v] = std::max(cfg.obs_std_fraction * largest[v], 1.0e-6);
  return model;
}

// -----------------------------------------------------------------------------
ObservationSet synthesizeObservations(const Trajectory & reference, const ScenarioConfig & cfg,
                                      Rng & rng, double noiseScale) {
  const auto network = observationNetwork(cfg.q, cfg.obs_stride);
  return synthesizeObservations(reference, cfg, network, observationErrors(reference, cfg, network),
                                rng, noiseScale);
}

ObservationSet synthesizeObservations(const Trajectory & reference, const ScenarioConfig & cfg,
                                      const std::vector<ObsSite> & network,
                                      const ObservationErrorModel & errors, Rng & rng,
                                      double noiseScale) {
  const std::vector<int> steps = observationSteps(cfg);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<ObsSite>> selectors(steps.size(), network);
  std::vector<Vector> values, sigmas;
  for (int step : steps) {
    if (step > reference.nSteps()) throw ConfigError("reference trajectory shorter than the window");
    const StateVector & x = reference.states[step];
    Vector y(network.size()), s(network.size());
    for (std::size_t m = 0; m < network.size(); ++m) {
      const ObsSite & site = network[m];
      s[m] = errors.sigma[static_cast<int>(site.var)];
      y[m] = x(site.var, site.i, site.j) + noiseScale * s[m] * normal(rng);
    }
    values.push_back(std::move(y));
    sigmas.push_back(std::move(s));
  }
  return ObservationSet(cfg.q, steps, std::move(selectors), std::move(values), std::move(sigmas));
}

// -----------------------------------------------------------------------------
ObservationSet injectFaults(const ObservationSet & obs, const std::vector<std::pair<int, int>> & sites,
                            const FaultSpec & spec) {
  if (sites.empty()) return obs;
  if (obs.nTimes() == 0) throw SiteNotObserved("observation set has no observation times");
  const int last = obs.nTimes() - 1;
  std::vector<Vector> values;
  for (int k = 0; k < obs.nTimes(); ++k) values.push_back(obs.values(k));
  const auto & sel = obs.selector(last);
  for (const auto & [i, j] : sites) {
    for (Var v : {Var::H, Var::UH, Var::VH}) {
      const auto it = std::find(sel.begin(), sel.end(), ObsSite{v, i, j});
      if (it == sel.end()) {
        throw SiteNotObserved("no " + std::string(varName(v)) + " observation at (" +
                              std::to_string(i) + "," + std::to_string(j) + ") at the final time");
      }
      double & y = values[last][it - sel.begin()];
      y = spec.mode == FaultMode::Multiplicative ? y * (1.0 + spec.magnitude) : y + spec.magnitude;
    }
  }
  return obs.withValues(std::move(values));
}

// -----------------------------------------------------------------------------
void writeObservationsCsv(std::ostream & os, const ObservationSet & obs) {
  os << "step,var,i,j,value,sigma\n" << std::setprecision(17);
  for (int k = 0; k < obs.nTimes(); ++k) {
    const auto & sel = obs.selector(k);
    for (std::size_t m = 0; m < sel.size(); ++m) {
      os << obs.step(k) << ',' << varName(sel[m].var) << ',' << sel[m].i << ',' << sel[m].j << ','
         << obs.values(k)[m] << ',' << obs.sigma(k)[m] << '\n';
    }
  }
}

}  // namespace obsimpact
