/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_SCENARIOCONFIG_H_
#define OBSIMPACT_SCENARIOCONFIG_H_

#include <cstdint>

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Grid, time stepping, assimilation window and error statistics of a twin
/// experiment on the square basin [-half_width, half_width]^2.
struct ScenarioConfig {
  int q = 40;                     // grid points per direction
  double domain_half_width = 3.0;
  double g = 9.81;
  double dt = 0.001;
  int n_steps_window = 100;
  int obs_every = 20;
  int n_steps_verify = 200;
  std::uint64_t seed = 1;

  // Gaussian bell initial condition
  double h_base = 100.0;
  double bell_amplitude = 30.0;
  double bell_width = 0.75;
  double u_const = 0.0;
  double v_const = 0.0;

  // error statistics
  double bg_std_fraction = 0.05;
  double bg_std_floor_fraction = 1.0;
  double bg_corr_length = 5.0;    // grid points
  double bg_corr_nugget = 1.0e-4;
  double obs_std_fraction = 0.01;
  int obs_stride = 1;             // observe every obs_stride-th cell in i and j
  bool obs_at_initial_time = false;

  int n() const {return 3 * q * q;}
  int cells() const {return q * q;}
  double dx() const {return 2.0 * domain_half_width / q;}

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

}  // namespace obsimpact

#endif  // OBSIMPACT_SCENARIOCONFIG_H_
