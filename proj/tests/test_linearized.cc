/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "Fixtures.h"
#include "obsimpact/Errors.h"
#include "obsimpact/Linearized.h"

using namespace obsimpact;
using namespace obsimpact::test;

namespace {

struct Setup {
  ScenarioConfig cfg = smallScenario();
  StateVector x0;
  std::shared_ptr<const CheckpointStore> store;
  explicit Setup(int steps) {
    cfg.u_const = 0.3;
    x0 = makeReferenceInitialState(cfg);
    store = std::make_shared<const CheckpointStore>(ShallowWaterModel(cfg), x0, steps);
  }
};

}  // namespace

// -----------------------------------------------------------------------------
TEST_CASE("tangent linear model is linear") {
  const Setup s(20);
  Rng rng = makeRng(11, RandomStream::Probe);
  const Vector u = scaledDirection(s.cfg, rng), w = scaledDirection(s.cfg, rng);
  CHECK(tlm(s.x0, Vector::Zero(s.cfg.n()), 20, s.cfg, s.store).isZero(0.0));
  const Vector lhs = tlm(s.x0, 2.5 * u - 0.75 * w, 20, s.cfg, s.store);
  const Vector rhs = 2.5 * tlm(s.x0, u, 20, s.cfg, s.store) - 0.75 * tlm(s.x0, w, 20, s.cfg, s.store);
  CHECK(relDiff(lhs, rhs) <= 1e-12);
}

TEST_CASE("tangent linear Taylor remainder is second order") {
  const Setup s(30);
  Rng rng = makeRng(12, RandomStream::Probe);
  const Vector u = scaledDirection(s.cfg, rng);
  const ShallowWaterModel model(s.cfg);
  const Vector base = s.store->state(30);
  const Vector du = tlm(s.x0, u, 30, s.cfg, s.store);
  std::vector<double> rem;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const Vector pert = model.propagate(StateVector(s.cfg.q, s.x0.values() + eps * u), 30).last().values();
    rem.push_back((pert - base - eps * du).norm());
  }
  for (size_t k = 1; k < rem.size(); ++k) {
    const double slope = std::log10(rem[k - 1] / rem[k]);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("adjoint satisfies the dot-product identity for several window lengths") {
  const Setup s(100);
  Rng rng = makeRng(13, RandomStream::Probe);
  for (int steps : {0, 1, 5, 20, 100}) {
    CAPTURE(steps);
    for (int trial = 0; trial < 4; ++trial) {
      const Vector u = scaledDirection(s.cfg, rng), w = standardNormal(s.cfg.n(), rng);
      const double a = tlm(s.x0, u, steps, s.cfg, s.store).dot(w);
      const double b = u.dot(foa(s.x0, w, steps, s.cfg, s.store));
      CHECK(relDiff(a, b) <= 1e-11);
    }
  }
  const Vector w = standardNormal(s.cfg.n(), rng);
  CHECK(foa(s.x0, w, 0, s.cfg, s.store) == w);
}

TEST_CASE("first-order adjoint is linear in its argument") {
  const Setup s(10);
  Rng rng = makeRng(14, RandomStream::Probe);
  const Vector a = standardNormal(s.cfg.n(), rng), b = standardNormal(s.cfg.n(), rng);
  CHECK(relDiff(foa(s.x0, 3.0 * a + b, 10, s.cfg, s.store),
                3.0 * foa(s.x0, a, 10, s.cfg, s.store) + foa(s.x0, b, 10, s.cfg, s.store)) <= 1e-12);
}

TEST_CASE("second-order adjoint matches finite differences of the first-order adjoint") {
  const Setup s(50);
  Rng rng = makeRng(15, RandomStream::Probe);
  const Vector lambda = standardNormal(s.cfg.n(), rng);
  for (int trial = 0; trial < 3; ++trial) {
    const Vector u = scaledDirection(s.cfg, rng);
    const Vector exact = soa(s.x0, u, lambda, 50, s.cfg, s.store);
    const double eps = 1e-5;
    const Vector fp = foa(StateVector(s.cfg.q, s.x0.values() + eps * u), lambda, 50, s.cfg);
    const Vector fm = foa(StateVector(s.cfg.q, s.x0.values() - eps * u), lambda, 50, s.cfg);
    CHECK(relDiff(exact, (fp - fm) / (2.0 * eps)) <= 1e-6);
  }
}

TEST_CASE("second-order adjoint is linear in both arguments") {
  const Setup s(10);
  Rng rng = makeRng(16, RandomStream::Probe);
  const Vector u = scaledDirection(s.cfg, rng), v = scaledDirection(s.cfg, rng);
  const Vector l = standardNormal(s.cfg.n(), rng), m = standardNormal(s.cfg.n(), rng);
  auto S = [&](const Vector & a, const Vector & b) {return soa(s.x0, a, b, 10, s.cfg, s.store);};
  CHECK(relDiff(S(u + 2.0 * v, l), S(u, l) + 2.0 * S(v, l)) <= 1e-11);
  CHECK(relDiff(S(u, l - m), S(u, l) - S(u, m)) <= 1e-11);
}

TEST_CASE("linearized model reports misuse") {
  const Setup s(5);
  const LinearizedModel lin(ShallowWaterModel(s.cfg), s.store);
  CHECK_THROWS_AS(lin.tlm(Vector::Zero(s.cfg.n()), 6), ConfigError);
  CHECK_THROWS_AS(lin.tlm(Vector::Zero(7), 5), DimensionMismatch);
  StateVector other = s.x0;
  other(Var::H, 0, 0) += 1.0;
  CHECK_THROWS_AS(tlm(other, Vector::Zero(s.cfg.n()), 5, s.cfg, s.store), TrajectoryMismatch);
}
