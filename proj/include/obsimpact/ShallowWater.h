/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_SHALLOWWATER_H_
#define OBSIMPACT_SHALLOWWATER_H_

#include <array>
#include <vector>

#include "obsimpact/ScenarioConfig.h"
#include "obsimpact/StateVector.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Sequence of states at steps 0..n_steps.
struct Trajectory {
  std::vector<StateVector> states;
  std::vector<double> step_times;

  int nSteps() const {return static_cast<int>(states.size()) - 1;}
  const StateVector & initial() const {return states.front();}
  const StateVector & last() const {return states.back();}
};

/// The four Runge-Kutta stage states of one step (the first is the step input).
using RkStages = std::array<Vector, 4>;

// -----------------------------------------------------------------------------
/// Shallow-water equations in flux form on a closed square basin.
///
/// Space: cell-centred finite volumes with central face fluxes
///   f(U) = -Dx F(U) - Dy G(U),
/// where F, G are the physical fluxes and Dx, Dy the centred differences with
/// reflective ghost cells (mirror h and tangential momentum, negate normal
/// momentum).  Time: classical fourth-order Runge-Kutta.
///
/// The tendency* members expose the exact first and second derivatives of f
/// that the tangent-linear and adjoint models are assembled from.
class ShallowWaterModel {
 public:
  explicit ShallowWaterModel(const ScenarioConfig & cfg);

  const ScenarioConfig & config() const {return cfg_;}
  int q() const {return cfg_.q;}
  int size() const {return cfg_.n();}

  /// du = f(u)
  void tendency(const Vector & u, Vector & du) const;
  /// out = f'(u) du
  void tendencyTL(const Vector & u, const Vector & du, Vector & out) const;
  /// out += f'(u)^T w
  void tendencyAD(const Vector & u, const Vector & w, Vector & out) const;
  /// out += (f''(u)[du])^T w
  void tendencySOA(const Vector & u, const Vector & du, const Vector & w, Vector & out) const;

  /// One RK4 step; stage states are written to `stages` when non-null.
  /// Throws NonFiniteState or NonPositiveDepth.
  void advance(const Vector & u, Vector & next, RkStages * stages = nullptr) const;

  StateVector step(const StateVector & x) const;
  Trajectory propagate(const StateVector & x0, int nSteps) const;

 private:
  void fluxes(const Vector & u, Vector & f, Vector & g) const;

  ScenarioConfig cfg_;
  double halfInvDx_;
};

// -----------------------------------------------------------------------------
StateVector step(const StateVector & x, const ScenarioConfig & cfg);
Trajectory propagate(const StateVector & x0, int nSteps, const ScenarioConfig & cfg);

/// Gaussian bell of thickness over a flat base with uniform velocity.
StateVector makeReferenceInitialState(const ScenarioConfig & cfg);

/// Sum of h over all cells.
double totalMass(const StateVector & x);

}  // namespace obsimpact

#endif  // OBSIMPACT_SHALLOWWATER_H_
