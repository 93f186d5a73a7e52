/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/ShallowWater.h"

#include <cmath>
#include <string>

#include "obsimpact/Errors.h"

namespace obsimpact {

namespace {

// Ghost-cell sign applied to each flux component at the walls.  A wall normal
// to x negates uh, which flips the x-fluxes of h and vh; likewise in y.
constexpr std::array<double, 3> kWallSignX = {-1.0, 1.0, -1.0};
constexpr std::array<double, 3> kWallSignY = {-1.0, -1.0, 1.0};

// out[i,j] -= c * (F[i,j+1] - F[i,j-1])
void subtractDiffX(const double * F, double sign, double c, int q, double * out) {
  for (int i = 0; i < q; ++i) {
    const double * Fr = F + i * q;
    double * o = out + i * q;
    o[0] -= c * (Fr[1] - sign * Fr[0]);
    for (int j = 1; j < q - 1; ++j) o[j] -= c * (Fr[j + 1] - Fr[j - 1]);
    o[q - 1] -= c * (sign * Fr[q - 1] - Fr[q - 2]);
  }
}

// out[i,j] -= c * (G[i+1,j] - G[i-1,j])
void subtractDiffY(const double * G, double sign, double c, int q, double * out) {
  for (int j = 0; j < q; ++j) out[j] -= c * (G[q + j] - sign * G[j]);
  for (int i = 1; i < q - 1; ++i) {
    const double * up = G + (i + 1) * q;
    const double * dn = G + (i - 1) * q;
    double * o = out + i * q;
    for (int j = 0; j < q; ++j) o[j] -= c * (up[j] - dn[j]);
  }
  const double * last = G + (q - 1) * q;
  const double * prev = G + (q - 2) * q;
  double * o = out + (q - 1) * q;
  for (int j = 0; j < q; ++j) o[j] -= c * (sign * last[j] - prev[j]);
}

// Transpose of subtractDiffX with respect to F: Fbar += (d out / d F)^T w
void subtractDiffXAD(const double * w, double sign, double c, int q, double * Fbar) {
  for (int i = 0; i < q; ++i) {
    const double * wr = w + i * q;
    double * b = Fbar + i * q;
    b[1] -= c * wr[0];
    b[0] += c * sign * wr[0];
    for (int j = 1; j < q - 1; ++j) {
      b[j + 1] -= c * wr[j];
      b[j - 1] += c * wr[j];
    }
    b[q - 1] -= c * sign * wr[q - 1];
    b[q - 2] += c * wr[q - 1];
  }
}

void subtractDiffYAD(const double * w, double sign, double c, int q, double * Gbar) {
  for (int j = 0; j < q; ++j) {
    Gbar[q + j] -= c * w[j];
    Gbar[j] += c * sign * w[j];
  }
  for (int i = 1; i < q - 1; ++i) {
    const double * wr = w + i * q;
    double * up = Gbar + (i + 1) * q;
    double * dn = Gbar + (i - 1) * q;
    for (int j = 0; j < q; ++j) {
      up[j] -= c * wr[j];
      dn[j] += c * wr[j];
    }
  }
  const double * wl = w + (q - 1) * q;
  double * last = Gbar + (q - 1) * q;
  double * prev = Gbar + (q - 2) * q;
  for (int j = 0; j < q; ++j) {
    last[j] -= c * sign * wl[j];
    prev[j] += c * wl[j];
  }
}

void checkState(const Vector & u, int cells) {
  if (!u.allFinite()) throw NonFiniteState("state contains NaN or Inf");
  for (int c = 0; c < cells; ++c) {
    if (!(u[c] > 0.0)) {
      throw NonPositiveDepth("non-positive fluid thickness h = " + std::to_string(u[c]) +
                             " in cell " + std::to_string(c));
    }
  }
}

}  // namespace

// -----------------------------------------------------------------------------
void ScenarioConfig::validate() const {
  if (q < 4) throw ConfigError("q must be at least 4");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(g > 0.0)) throw ConfigError("g must be positive");
  if (!(domain_half_width > 0.0)) throw ConfigError("domain_half_width must be positive");
  if (n_steps_window < 0 || n_steps_verify < 0) throw ConfigError("step counts must be >= 0");
  if (obs_every < 1) throw ConfigError("obs_every must be >= 1");
  if (n_steps_window % obs_every != 0) {
    throw ConfigError("obs_every must divide n_steps_window");
  }
  if (obs_stride < 1) throw ConfigError("obs_stride must be >= 1");
  if (!(h_base > 0.0)) throw ConfigError("h_base must be positive");
  if (!(bell_width > 0.0)) throw ConfigError("bell_width must be positive");
  if (bg_corr_length < 0.0) throw ConfigError("bg_corr_length must be >= 0");
  if (bg_corr_nugget < 0.0) throw ConfigError("bg_corr_nugget must be >= 0");
  if (!(bg_std_fraction > 0.0) || !(obs_std_fraction > 0.0)) {
    throw ConfigError("error standard deviation fractions must be positive");
  }
}

// -----------------------------------------------------------------------------
ShallowWaterModel::ShallowWaterModel(const ScenarioConfig & cfg)
  : cfg_(cfg), halfInvDx_(0.5 / cfg.dx())
{
  cfg_.validate();
}

// -----------------------------------------------------------------------------
void ShallowWaterModel::fluxes(const Vector & u, Vector & f, Vector & g) const {
  const int N = cfg_.cells();
  const double grav = cfg_.g;
  f.resize(3 * N);
  g.resize(3 * N);
  const double * h = u.data();
  const double * p = h + N;
  const double * r = p + N;
  for (int c = 0; c < N; ++c) {
    const double ih = 1.0 / h[c];
    const double pres = 0.5 * grav * h[c] * h[c];
    const double pr = p[c] * r[c] * ih;
    f[c] = p[c];
    f[N + c] = p[c] * p[c] * ih + pres;
    f[2 * N + c] = pr;
    g[c] = r[c];
    g[N + c] = pr;
    g[2 * N + c] = r[c] * r[c] * ih + pres;
  }
}

// -----------------------------------------------------------------------------
void ShallowWaterModel::tendency(const Vector & u, Vector & du) const {
  const int q = cfg_.q;
  const int N = cfg_.cells();
  Vector f, g;
  fluxes(u, f, g);
  du.setZero(3 * N);
  for (int m = 0; m < 3; ++m) {
    subtractDiffX(f.data() + m * N, kWallSignX[m], halfInvDx_, q, du.data() + m * N);
    subtractDiffY(g.data() + m * N, kWallSignY[m], halfInvDx_, q, du.data() + m * N);
  }
}

// -----------------------------------------------------------------------------
void ShallowWaterModel::tendencyTL(const Vector & u, const Vector & du, Vector & out) const {
  const int q = cfg_.q;
  const int N = cfg_.cells();
  const double grav = cfg_.g;
  Vector f(3 * N), g(3 * N);
  const double * h = u.data();
  const double * p = h + N;
  const double * r = p + N;
  const double * dh = du.data();
  const double * dp = dh + N;
  const double * dr = dp + N;
  for (int c = 0; c < N; ++c) {
    const double ih = 1.0 / h[c];
    const double a = p[c] * ih;
    const double b = r[c] * ih;
    const double gh = grav * h[c];
    f[c] = dp[c];
    f[N + c] = (gh - a * a) * dh[c] + 2.0 * a * dp[c];
    f[2 * N + c] = -a * b * dh[c] + b * dp[c] + a * dr[c];
    g[c] = dr[c];
    g[N + c] = f[2 * N + c];
    g[2 * N + c] = (gh - b * b) * dh[c] + 2.0 * b * dr[c];
  }
  out.setZero(3 * N);
  for (int m = 0; m < 3; ++m) {
    subtractDiffX(f.data() + m * N, kWallSignX[m], halfInvDx_, q, out.data() + m * N);
    subtractDiffY(g.data() + m * N, kWallSignY[m], halfInvDx_, q, out.data() + m * N);
  }
}

// -----------------------------------------------------------------------------
void ShallowWaterModel::tendencyAD(const Vector & u, const Vector & w, Vector & out) const {
  const int q = cfg_.q;
  const int N = cfg_.cells();
  const double grav = cfg_.g;
  Vector zf = Vector::Zero(3 * N);
  Vector zg = Vector::Zero(3 * N);
  for (int m = 0; m < 3; ++m) {
    subtractDiffXAD(w.data() + m * N, kWallSignX[m], halfInvDx_, q, zf.data() + m * N);
    subtractDiffYAD(w.data() + m * N, kWallSignY[m], halfInvDx_, q, zg.data() + m * N);
  }
  const double * h = u.data();
  const double * p = h + N;
  const double * r = p + N;
  double * oh = out.data();
  double * op = oh + N;
  double * orr = op + N;
  for (int c = 0; c < N; ++c) {
    const double ih = 1.0 / h[c];
    const double a = p[c] * ih;
    const double b = r[c] * ih;
    const double gh = grav * h[c];
    const double f1 = zf[c], f2 = zf[N + c], f3 = zf[2 * N + c];
    const double g1 = zg[c], g2 = zg[N + c], g3 = zg[2 * N + c];
    oh[c] += (gh - a * a) * f2 - a * b * f3 - a * b * g2 + (gh - b * b) * g3;
    op[c] += f1 + 2.0 * a * f2 + b * f3 + b * g2;
    orr[c] += a * f3 + g1 + a * g2 + 2.0 * b * g3;
  }
}

// -----------------------------------------------------------------------------
void ShallowWaterModel::tendencySOA(const Vector & u, const Vector & du, const Vector & w,
                                    Vector & out) const {
  const int q = cfg_.q;
  const int N = cfg_.cells();
  const double grav = cfg_.g;
  Vector zf = Vector::Zero(3 * N);
  Vector zg = Vector::Zero(3 * N);
  for (int m = 0; m < 3; ++m) {
    subtractDiffXAD(w.data() + m * N, kWallSignX[m], halfInvDx_, q, zf.data() + m * N);
    subtractDiffYAD(w.data() + m * N, kWallSignY[m], halfInvDx_, q, zg.data() + m * N);
  }
  const double * h = u.data();
  const double * p = h + N;
  const double * r = p + N;
  const double * dh = du.data();
  const double * dp = dh + N;
  const double * dr = dp + N;
  double * oh = out.data();
  double * op = oh + N;
  double * orr = op + N;
  for (int c = 0; c < N; ++c) {
    const double ih = 1.0 / h[c];
    const double a = p[c] * ih;
    const double b = r[c] * ih;
    // Hessians of the flux components; F1 and G1 are linear.
    //   F2 = p^2/h + g h^2/2 : hh = 2a^2/h + g, hp = -2a/h, pp = 2/h
    //   F3 = G2 = p r / h    : hh = 2ab/h, hp = -b/h, hr = -a/h, pr = 1/h
    //   G3 = r^2/h + g h^2/2 : hh = 2b^2/h + g, hr = -2b/h, rr = 2/h
    const double z2 = zf[N + c];
    const double zpr = zf[2 * N + c] + zg[N + c];
    const double z3 = zg[2 * N + c];
    const double vh = dh[c], vp = dp[c], vr = dr[c];
    oh[c] += z2 * ((2.0 * a * a * ih + grav) * vh - 2.0 * a * ih * vp)
           + zpr * (2.0 * a * b * ih * vh - b * ih * vp - a * ih * vr)
           + z3 * ((2.0 * b * b * ih + grav) * vh - 2.0 * b * ih * vr);
    op[c] += z2 * (-2.0 * a * ih * vh + 2.0 * ih * vp)
           + zpr * (-b * ih * vh + ih * vr);
    orr[c] += zpr * (-a * ih * vh + ih * vp)
            + z3 * (-2.0 * b * ih * vh + 2.0 * ih * vr);
  }
}

// -----------------------------------------------------------------------------
void ShallowWaterModel::advance(const Vector & u, Vector & next, RkStages * stages) const {
  const double dt = cfg_.dt;
  Vector k1, k2, k3, k4;
  tendency(u, k1);
  Vector u2 = u + 0.5 * dt * k1;
  tendency(u2, k2);
  Vector u3 = u + 0.5 * dt * k2;
  tendency(u3, k3);
  Vector u4 = u + dt * k3;
  tendency(u4, k4);
  next = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  checkState(next, cfg_.cells());
  if (stages) {
    (*stages)[0] = u;
    (*stages)[1] = std::move(u2);
    (*stages)[2] = std::move(u3);
    (*stages)[3] = std::move(u4);
  }
}

// -----------------------------------------------------------------------------
StateVector ShallowWaterModel::step(const StateVector & x) const {
  if (x.q() != cfg_.q) throw DimensionMismatch("state grid does not match scenario grid");
  checkState(x.values(), cfg_.cells());
  StateVector out(cfg_.q);
  advance(x.values(), out.values());
  return out;
}

// -----------------------------------------------------------------------------
Trajectory ShallowWaterModel::propagate(const StateVector & x0, int nSteps) const {
  if (nSteps < 0) throw ConfigError("n_steps must be >= 0");
  if (x0.q() != cfg_.q) throw DimensionMismatch("state grid does not match scenario grid");
  Trajectory traj;
  traj.states.reserve(nSteps + 1);
  traj.step_times.reserve(nSteps + 1);
  traj.states.push_back(x0);
  traj.step_times.push_back(0.0);
  try {
    checkState(x0.values(), cfg_.cells());
  } catch (const Error & e) {
    throw PropagationError(e, 0);
  }
  for (int k = 0; k < nSteps; ++k) {
    StateVector next(cfg_.q);
    try {
      advance(traj.states.back().values(), next.values());
    } catch (const Error & e) {
      throw PropagationError(e, k + 1);
    }
    traj.states.push_back(std::move(next));
    traj.step_times.push_back((k + 1) * cfg_.dt);
  }
  return traj;
}

// -----------------------------------------------------------------------------
StateVector step(const StateVector & x, const ScenarioConfig & cfg) {
  return ShallowWaterModel(cfg).step(x);
}

Trajectory propagate(const StateVector & x0, int nSteps, const ScenarioConfig & cfg) {
  return ShallowWaterModel(cfg).propagate(x0, nSteps);
}

// -----------------------------------------------------------------------------
StateVector makeReferenceInitialState(const ScenarioConfig & cfg) {
  cfg.validate();
  const int q = cfg.q;
  const double dx = cfg.dx();
  const double s2 = 2.0 * cfg.bell_width * cfg.bell_width;
  StateVector x(q);
  for (int i = 0; i < q; ++i) {
    const double y = -cfg.domain_half_width + (i + 0.5) * dx;
    for (int j = 0; j < q; ++j) {
      const double xc = -cfg.domain_half_width + (j + 0.5) * dx;
      const double h = cfg.h_base + cfg.bell_amplitude * std::exp(-(xc * xc + y * y) / s2);
      x(Var::H, i, j) = h;
      x(Var::UH, i, j) = cfg.u_const * h;
      x(Var::VH, i, j) = cfg.v_const * h;
    }
  }
  return x;
}

// -----------------------------------------------------------------------------
double totalMass(const StateVector & x) {
  return x.field(Var::H).sum();
}

}  // namespace obsimpact
