/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "Fixtures.h"
#include "obsimpact/Errors.h"
#include "obsimpact/FieldIO.h"
#include "obsimpact/Impact.h"

using namespace obsimpact;
using namespace obsimpact::test;

namespace {

const SupersensitivitySystem & smallSystem() {
  static const SupersensitivitySystem sys = buildSystem(smallAnalysis(), HessianVariant::SoaExact);
  return sys;
}

}  // namespace

// -----------------------------------------------------------------------------
TEST_CASE("forecast score") {
  const ScenarioConfig cfg = smallScenario();
  const StateVector x0 = makeReferenceInitialState(cfg);
  const Trajectory t = propagate(x0, 50, cfg);
  const ForecastScoreSpec exact = ForecastScoreSpec::identity(t.last(), 50);
  CHECK(forecastScore(cfg, x0.values(), exact) == 0.0);
  CHECK(scoreGradient(cfg, x0.values(), exact).isZero(0.0));

  StateVector shifted = t.last();
  shifted.values().array() += 0.5;
  const ForecastScoreSpec off = ForecastScoreSpec::identity(shifted, 50);
  CHECK(forecastScore(cfg, x0.values(), off) == doctest::Approx(0.25 * cfg.n()));

  ForecastScoreSpec weighted = off;
  weighted.weights = subdomainMask(cfg.q, 0, 2, 0, 10);
  CHECK(forecastScore(cfg, x0.values(), weighted) == doctest::Approx(0.25 * 60));
  weighted.weights = Vector::Zero(cfg.n());
  CHECK(scoreGradient(cfg, x0.values(), weighted).isZero(0.0));

  weighted.weights = -Vector::Ones(cfg.n());
  CHECK_THROWS_AS(weighted.validate(), ConfigError);
  weighted.weights = Vector::Ones(3);
  CHECK_THROWS_AS(weighted.validate(), DimensionMismatch);
}

TEST_CASE("subdomain mask") {
  const Vector w = subdomainMask(4, 1, 3, 2, 4);
  CHECK(w.sum() == 12.0);
  CHECK(w[StateLayout(4).index(Var::UH, 1, 2)] == 1.0);
  CHECK(w[StateLayout(4).index(Var::UH, 0, 2)] == 0.0);
}

TEST_CASE("analysis forecast beats the background forecast") {
  const auto & a = smallAnalysis();
  const ForecastScoreSpec spec = ForecastScoreSpec::identity(a.twin.verification(), a.twin.cfg.n_steps_verify);
  CHECK(forecastScore(a.twin.cfg, a.xa(), spec) <= forecastScore(a.twin.cfg, a.twin.background(), spec));
}

TEST_CASE("score gradient matches central finite differences") {
  const auto & a = smallAnalysis();
  const ScenarioConfig & cfg = a.twin.cfg;
  const ForecastScoreSpec spec = ForecastScoreSpec::identity(a.twin.verification(), cfg.n_steps_verify);
  const Vector g = scoreGradient(cfg, a.xa(), spec);
  Rng rng = makeRng(61, RandomStream::Probe);
  for (int k = 0; k < 5; ++k) {
    const Vector u = scaledDirection(cfg, rng);
    const double eps = 1e-4;
    const double fd = (forecastScore(cfg, a.xa() + eps * u, spec) - forecastScore(cfg, a.xa() - eps * u, spec)) /
                      (2.0 * eps);
    CHECK(relDiff(fd, g.dot(u)) <= 1e-6);
  }
}

TEST_CASE("supersensitivity solve") {
  const SupersensitivitySystem & sys = smallSystem();
  const SolverReport zero = solveSupersensitivity(*sys.hessian, Vector::Zero(sys.rhs.size()), KrylovMethod::CG,
                                                  nullptr, {});
  CHECK(zero.x.isZero(0.0));

  const DenseReference ref = denseReference(sys, 1);
  SolveBudget budget;
  budget.max_matvecs = 2000;
  budget.residual_tol = 1e-12;
  const SolverReport r = solveSupersensitivity(*sys.hessian, sys.rhs, KrylovMethod::CG, nullptr, budget);
  const double rmse = (r.x - ref.solution).norm() / std::sqrt(double(r.x.size()));
  MESSAGE("q = 10 CG vs dense RMSE: " << rmse);
  CHECK(rmse <= 1e-6);
  CHECK(sys.rhs.dot(ref.solution) >= 0.0);
}

TEST_CASE("observation and background sensitivities") {
  const auto & a = smallAnalysis();
  const FourDVar & p = *a.twin.problem;
  Rng rng = makeRng(62, RandomStream::Probe);
  const Vector mu = standardNormal(p.size(), rng), nu = standardNormal(p.size(), rng);

  const ImpactResult zero = observationSensitivities(p, a.xa(), Vector::Zero(p.size()));
  for (const Vector & s : zero.obsSensitivity) CHECK(s.isZero(0.0));
  CHECK(zero.backgroundSensitivity.isZero(0.0));

  const ImpactResult r = observationSensitivities(p, a.xa(), mu);
  REQUIRE(r.obsSensitivity.size() == 5u);
  CHECK(r.steps == p.observations().steps());
  const Vector muK = tlm(StateVector(p.config().q, a.xa()), mu, r.steps[2], p.config());
  CHECK(relDiff(r.mu[2], muK) <= 1e-13);
  CHECK(relDiff(r.obsSensitivity[2], p.observations().rInverse(2, p.observations().hApply(2, muK))) <= 1e-13);
  CHECK(relDiff(r.backgroundSensitivity, p.covariance().applyInverse(mu)) <= 1e-13);

  const ImpactResult sum = observationSensitivities(p, a.xa(), mu + 2.0 * nu);
  const ImpactResult rn = observationSensitivities(p, a.xa(), nu);
  for (int k = 0; k < 5; ++k) CHECK(relDiff(sum.obsSensitivity[k], r.obsSensitivity[k] + 2.0 * rn.obsSensitivity[k]) <= 1e-10);

  CHECK_THROWS_AS(observationSensitivities(p, a.xa(), Vector::Ones(3)), DimensionMismatch);
}

TEST_CASE("observations at the initial time see the supersensitivity directly") {
  ScenarioConfig cfg = smallScenario(6);
  cfg.obs_at_initial_time = true;
  const TwinExperiment twin = buildTwin(cfg);
  const FourDVar & p = *twin.problem;
  Rng rng = makeRng(63, RandomStream::Probe);
  const Vector mu = standardNormal(p.size(), rng);
  const ImpactResult r = observationSensitivities(p, twin.background(), mu);
  CHECK(r.steps.front() == 0);
  CHECK(r.obsSensitivity.front() == p.observations().rInverse(0, mu));
}

TEST_CASE("sensitivity and impact fields") {
  const auto & a = smallAnalysis();
  const FourDVar & p = *a.twin.problem;
  Rng rng = makeRng(64, RandomStream::Probe);
  const ImpactResult r = observationSensitivities(p, a.xa(), standardNormal(p.size(), rng));
  const int last = 4;
  const StateVector s = sensitivityField(p, r, last);
  CHECK(s.values() == p.observations().hTranspose(last, r.obsSensitivity[last]));

  const Vector xk = propagate(StateVector(p.config().q, a.xa()), p.observations().step(last), p.config()).last().values();
  const Vector dep = p.observations().values(last) - p.observations().hApply(last, xk);
  const StateVector imp = impactField(p, r, a.xa(), last);
  CHECK(relDiff(imp.values(), p.observations().hTranspose(last, r.obsSensitivity[last].cwiseProduct(dep))) <= 1e-14);

  const Vector mag = sensitivityMagnitude(s);
  CHECK(mag.size() == 100);
  const int c = 37;
  CHECK(mag[c] == doctest::Approx(std::sqrt(std::pow(s.values()[c], 2) + std::pow(s.values()[100 + c], 2) +
                                            std::pow(s.values()[200 + c], 2))));
}

TEST_CASE("local maxima and the dominant pair") {
  const int q = 8;
  Vector f = Vector::Zero(q * q);
  f[1 * q + 1] = 10.0;
  f[6 * q + 5] = 8.0;
  f[3 * q + 6] = 2.0;
  f[0 * q + 7] = 1.0;
  // A plateau is not a strict maximum.
  f[7 * q + 0] = 5.0;
  f[7 * q + 1] = 5.0;

  const auto peaks = localMaxima(f, q);
  REQUIRE(peaks.size() == 4u);
  CHECK(peaks[0].i == 1);
  CHECK(peaks[0].j == 1);
  CHECK(peaks[1].value == 8.0);
  CHECK(peaks[2].value == 2.0);

  const DominantPair d = dominantPair(f, q, 1.5);
  CHECK(d.top.size() == 2u);
  CHECK(d.ratio == doctest::Approx(4.0));
  CHECK(d.dominant);
  CHECK(!dominantPair(f, q, 5.0).dominant);
  CHECK_THROWS_AS(localMaxima(Vector::Zero(10), q), DimensionMismatch);
}

TEST_CASE("impact exports") {
  const auto & a = smallAnalysis();
  const FourDVar & p = *a.twin.problem;
  const ImpactResult r = observationSensitivities(p, a.xa(), Vector::Ones(p.size()));
  std::ostringstream os;
  writeImpactCsv(os, p, r);
  const std::string csv = os.str();
  CHECK(csv.rfind("step,var,i,j,sensitivity\n20,h,0,0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + p.observations().totalCount());

  const auto dir = std::filesystem::temp_directory_path() / "obsimpact_impact_fields";
  std::filesystem::create_directories(dir);
  writeImpactFields(dir.string(), p, r);
  CHECK(readSwefFile((dir / "sens_obs_step100.swef").string()).values() == sensitivityField(p, r, 4).values());
  CHECK(readSwefFile((dir / "mu0.swef").string()).values() == r.mu0);
  CHECK(std::filesystem::exists(dir / "sens_background.swef"));
  std::filesystem::remove_all(dir);
}
