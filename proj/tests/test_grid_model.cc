/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "Fixtures.h"
#include "obsimpact/Errors.h"
#include "obsimpact/FieldIO.h"
#include "obsimpact/ShallowWater.h"

using namespace obsimpact;
using namespace obsimpact::test;

namespace {

// Second implementation of the forward model, written independently from the
// library: explicit ghost-cell padding, fluxes evaluated on the padded state.
class ReferenceModel {
 public:
  explicit ReferenceModel(const ScenarioConfig & cfg) : cfg_(cfg), q_(cfg.q) {}

  Vector step(const Vector & u) const {
    const double dt = cfg_.dt;
    const Vector k1 = rhs(u);
    const Vector k2 = rhs(u + 0.5 * dt * k1);
    const Vector k3 = rhs(u + 0.5 * dt * k2);
    const Vector k4 = rhs(u + dt * k3);
    return u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

 private:
  struct Cell {double h, p, r;};

  // Padded value at (i, j) for -1 <= i, j <= q.
  Cell at(const Vector & u, int i, int j) const {
    const int N = q_ * q_;
    double sp = 1.0, sr = 1.0;
    if (j < 0) {j = 0; sp = -1.0;}
    if (j >= q_) {j = q_ - 1; sp = -1.0;}
    if (i < 0) {i = 0; sr = -1.0;}
    if (i >= q_) {i = q_ - 1; sr = -1.0;}
    const int c = i * q_ + j;
    return {u[c], sp * u[N + c], sr * u[2 * N + c]};
  }

  std::array<double, 3> fluxX(const Cell & s) const {
    return {s.p, s.p * s.p / s.h + 0.5 * cfg_.g * s.h * s.h, s.p * s.r / s.h};
  }
  std::array<double, 3> fluxY(const Cell & s) const {
    return {s.r, s.p * s.r / s.h, s.r * s.r / s.h + 0.5 * cfg_.g * s.h * s.h};
  }

  Vector rhs(const Vector & u) const {
    const int N = q_ * q_;
    const double dx = cfg_.dx();
    Vector out(3 * N);
    for (int i = 0; i < q_; ++i) {
      for (int j = 0; j < q_; ++j) {
        const auto e = fluxX(at(u, i, j + 1));
        const auto w = fluxX(at(u, i, j - 1));
        const auto n = fluxY(at(u, i + 1, j));
        const auto s = fluxY(at(u, i - 1, j));
        for (int m = 0; m < 3; ++m) {
          out[m * N + i * q_ + j] = -(e[m] - w[m]) / (2.0 * dx) - (n[m] - s[m]) / (2.0 * dx);
        }
      }
    }
    return out;
  }

  ScenarioConfig cfg_;
  int q_;
};

StateVector lakeAtRest(int q, double depth) {
  StateVector x(q);
  x.field(Var::H).setConstant(depth);
  return x;
}

}  // namespace

// -----------------------------------------------------------------------------
TEST_CASE("state layout flattens variables, then rows, then columns") {
  const StateLayout L(40);
  CHECK(L.size() == 4800);
  CHECK(L.index(Var::H, 0, 0) == 0);
  CHECK(L.index(Var::UH, 0, 0) == 1600);
  CHECK(L.index(Var::VH, 0, 0) == 3200);
  CHECK(L.index(Var::H, 10, 20) == 420);
  CHECK(varFromName("uh") == Var::UH);
  CHECK(varName(Var::VH) == "vh");
}

TEST_CASE("scenario validation") {
  ScenarioConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.dx() == doctest::Approx(0.15));
  cfg.q = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ScenarioConfig();
  cfg.obs_every = 30;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ScenarioConfig();
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("lake at rest is a fixed point") {
  const ScenarioConfig cfg = smallScenario(12);
  const StateVector x = lakeAtRest(12, 7.5);
  const StateVector y = step(x, cfg);
  CHECK(relDiff(x.values(), y.values()) <= 1e-13);
}

TEST_CASE("one step conserves mass at q = 40") {
  const ScenarioConfig cfg;
  const StateVector x0 = makeReferenceInitialState(cfg);
  const StateVector x1 = step(x0, cfg);
  CHECK(relDiff(totalMass(x0), totalMass(x1)) <= 1e-12);
}

TEST_CASE("mass is conserved over a hundred steps") {
  const ScenarioConfig cfg = smallScenario(16);
  const Trajectory t = propagate(makeReferenceInitialState(cfg), 100, cfg);
  for (const StateVector & s : t.states) CHECK(relDiff(totalMass(s), totalMass(t.initial())) <= 1e-12);
}

TEST_CASE("forward model matches an independent reference implementation") {
  ScenarioConfig cfg = smallScenario(20);
  cfg.u_const = 0.4;
  cfg.v_const = -0.25;
  const StateVector x0 = makeReferenceInitialState(cfg);
  const Trajectory t = propagate(x0, 100, cfg);
  const ReferenceModel ref(cfg);
  Vector u = x0.values();
  for (int k = 0; k < 100; ++k) u = ref.step(u);
  CHECK(relDiff(t.last().values(), u) <= 1e-10);
}

TEST_CASE("propagation is deterministic and composes") {
  const ScenarioConfig cfg = smallScenario();
  const StateVector x0 = makeReferenceInitialState(cfg);
  const Trajectory zero = propagate(x0, 0, cfg);
  CHECK(zero.nSteps() == 0);
  CHECK(zero.last().values() == x0.values());

  const Trajectory whole = propagate(x0, 30, cfg);
  const Trajectory a = propagate(x0, 12, cfg);
  const Trajectory b = propagate(a.last(), 18, cfg);
  CHECK(b.last().values() == whole.last().values());
  CHECK(propagate(x0, 30, cfg).last().values() == whole.last().values());
  CHECK(whole.step_times.back() == doctest::Approx(30 * cfg.dt));
}

TEST_CASE("reference scenario moves the wave and stays finite") {
  const ScenarioConfig cfg;
  const Trajectory t = propagate(makeReferenceInitialState(cfg), 100, cfg);
  CHECK(t.last().allFinite());
  const double moved = (t.last().field(Var::H) - t.initial().field(Var::H)).cwiseAbs().maxCoeff();
  CHECK(moved > 0.0);
}

TEST_CASE("Gaussian bell initial state") {
  const ScenarioConfig cfg;
  const StateVector x = makeReferenceInitialState(cfg);
  const int q = cfg.q;

  Eigen::Index imax = 0;
  const double hmax = x.field(Var::H).maxCoeff(&imax);
  const int i = static_cast<int>(imax) / q, j = static_cast<int>(imax) % q;
  const double yc = -cfg.domain_half_width + (i + 0.5) * cfg.dx();
  const double xc = -cfg.domain_half_width + (j + 0.5) * cfg.dx();
  CHECK(std::hypot(xc, yc) <= std::sqrt(2.0) * cfg.dx() / 2.0 + 1e-12);
  const double w2 = cfg.bell_width * cfg.bell_width;
  CHECK(hmax == doctest::Approx(cfg.h_base + cfg.bell_amplitude * std::exp(-(xc * xc + yc * yc) / (2 * w2))));

  double asym = 0.0;
  for (int a = 0; a < q; ++a) {
    for (int b = 0; b < q; ++b) asym = std::max(asym, std::abs(x(Var::H, a, b) - x(Var::H, b, a)));
  }
  CHECK(asym <= 1e-15);
  CHECK(x.field(Var::UH).isZero(0.0));

  // Quadrature of the bell against the analytic Gaussian integral.
  const double volume = (x.field(Var::H).array() - cfg.h_base).sum() * cfg.dx() * cfg.dx();
  const double exact = 2.0 * std::numbers::pi * w2 * cfg.bell_amplitude;
  CHECK(std::abs(volume - exact) <= 0.02 * exact);
}

TEST_CASE("invalid states raise typed errors") {
  const ScenarioConfig cfg = smallScenario();
  StateVector x = lakeAtRest(10, 1.0);
  x(Var::H, 3, 3) = -1.0;
  CHECK_THROWS_AS(step(x, cfg), NonPositiveDepth);
  x(Var::H, 3, 3) = std::nan("");
  CHECK_THROWS_AS(step(x, cfg), NonFiniteState);
  CHECK_THROWS_AS(step(lakeAtRest(8, 1.0), cfg), DimensionMismatch);
}

TEST_CASE("SWEF and CSV export") {
  const ScenarioConfig cfg = smallScenario(6);
  const StateVector x = makeReferenceInitialState(cfg);
  std::stringstream ss;
  writeSwef(ss, x);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 16 + 8 * 108);
  CHECK(bytes.substr(0, 4) == "SWEF");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[8]) == 6);
  CHECK(static_cast<unsigned char>(bytes[12]) == 3);
  const StateVector y = readSwef(ss);
  CHECK(y.q() == 6);
  CHECK(y.values() == x.values());

  std::stringstream bad("SWEX");
  CHECK_THROWS_AS(readSwef(bad), IoError);

  std::ostringstream csv;
  writeFieldCsv(csv, x);
  std::istringstream lines(csv.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "var,i,j,value");
  CHECK(first.rfind("h,0,0,", 0) == 0);
}
