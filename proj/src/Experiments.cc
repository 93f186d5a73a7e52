/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Experiments.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <thread>

#include <Eigen/Cholesky>

#include "obsimpact/Errors.h"
#include "obsimpact/FieldIO.h"
#include "obsimpact/Lanczos.h"
#include "obsimpact/Multigrid.h"
#include "obsimpact/Parallel.h"

namespace obsimpact {

namespace {

std::string prepare(const std::string & dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

std::ofstream openOut(const std::string & path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  return os;
}

void saveConfig(const ExperimentConfig & cfg, const std::string & out) {
  auto os = openOut(out + "/config_used.txt");
  writeExperimentConfig(os, cfg);
}

std::string stepName(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05d", k);
  return buf;
}

double rms(const Vector & v) {return v.norm() / std::sqrt(double(v.size()));}

}  // namespace

// -----------------------------------------------------------------------------
int resolveJobs(int requested) {
  int jobs = requested > 0 ? requested : 1;
  if (const char * env = std::getenv("OBS_IMPACT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) jobs = std::min(jobs, cap);
  }
  return jobs;
}

// -----------------------------------------------------------------------------
Analysis runAssimilation(const ExperimentConfig & cfg, bool withFaults) {
  cfg.validate();
  Analysis a{buildTwin(cfg.scenario, cfg.obs_noise_scale), {}};
  if (withFaults) {
    auto faulty = std::make_shared<const ObservationSet>(
        injectFaults(a.twin.problem->observations(), cfg.faultSites(), cfg.fault));
    a.twin = withObservations(a.twin, std::move(faulty));
  }
  LbfgsOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.grad_tol_rel = cfg.grad_tol_rel;
  const Vector start = cfg.start_from_truth ? a.twin.truthInitial().values() : a.twin.background();
  a.minimizer = minimize(*a.twin.problem, start, opts);
  return a;
}

SupersensitivitySystem buildSystem(const Analysis & analysis, HessianVariant variant) {
  SupersensitivitySystem sys;
  const ScenarioConfig & cfg = analysis.twin.cfg;
  sys.hessian = std::make_shared<HessianOperator>(analysis.twin.problem, analysis.xa(), variant);
  sys.score = ForecastScoreSpec::identity(analysis.twin.verification(), cfg.n_steps_verify);
  sys.rhs = scoreGradient(cfg, analysis.xa(), sys.score);
  return sys;
}

DenseReference denseReference(const SupersensitivitySystem & sys, int jobs) {
  DenseReference ref;
  ref.hessian = assembleDenseOperator(*sys.hessian, jobs);
  const Matrix sym = 0.5 * (ref.hessian + ref.hessian.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) throw FactorizationFailure("assembled Hessian is not positive definite");
  ref.solution = llt.solve(sys.rhs);
  return ref;
}

PreconditionerPtr makePreconditioner(PreconditionerKind kind, const ExperimentConfig & cfg,
                                     const Analysis & analysis, const SupersensitivitySystem & sys,
                                     const Matrix * dense, int jobs) {
  const HessianOperator & H = *sys.hessian;
  switch (kind) {
    case PreconditionerKind::ExactDiagonal:
      return dense ? buildExactDiagonal(*dense) : buildExactDiagonal(H);
    case PreconditionerKind::B0Diagonal:
      return buildB0Diagonal(analysis.twin.problem->covariance());
    case PreconditionerKind::RowSum:
      return buildRowSum(H);
    case PreconditionerKind::ProbedBlock:
      return buildProbedBlock(H, cfg.scenario.q);
    case PreconditionerKind::LbfgsLmp: {
      const auto & all = analysis.minimizer.pairs;
      const size_t keep = std::min<size_t>(cfg.lbfgs_pairs, all.size());
      std::vector<CurvaturePair> pairs(all.end() - keep, all.end());
      auto B = analysis.twin.problem->covariancePtr();
      return buildLbfgsLmp(pairs, [B](const Vector & v) {return Vector(B->diag().cwiseProduct(v));});
    }
    case PreconditionerKind::EigenpairLmp: {
      Rng rng = makeRng(cfg.scenario.seed, RandomStream::Lanczos);
      const auto t0 = std::chrono::steady_clock::now();
      const EigenPairs ep = lanczosEigenpairs(H, cfg.lanczos_k, cfg.lanczos_max_matvecs, rng);
      auto p = buildEigenpairLmp(ep.values, ep.vectors);
      p->setBuildCost(ep.matvecs, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      return p;
    }
    case PreconditionerKind::RandomizedSvd: {
      Rng rng = makeRng(cfg.scenario.seed, RandomStream::Sketch);
      return buildRandomizedSvd(H, cfg.rsvd_ell, rng, jobs);
    }
  }
  throw ConfigError("unhandled preconditioner kind");
}

// -----------------------------------------------------------------------------
void cmdSimulate(const ExperimentConfig & cfg, const std::string & out, std::ostream & log) {
  cfg.validate();
  prepare(out);
  saveConfig(cfg, out);
  const Trajectory traj = propagate(makeReferenceInitialState(cfg.scenario), cfg.simulate_steps, cfg.scenario);
  auto csv = openOut(out + "/mass.csv");
  csv << "step,time,mass\n" << std::setprecision(17);
  int files = 0;
  for (int k = 0; k <= traj.nSteps(); ++k) {
    csv << k << ',' << k * cfg.scenario.dt << ',' << totalMass(traj.states[k]) << '\n';
    if (k % cfg.snapshot_stride == 0) {
      writeSwefFile(out + "/state_step" + stepName(k) + ".swef", traj.states[k]);
      ++files;
    }
  }
  log << "simulate: " << traj.nSteps() << " steps, " << files << " snapshots written to " << out << '\n';
}

void cmdAssimilate(const ExperimentConfig & cfg, const std::string & out, std::ostream & log) {
  prepare(out);
  saveConfig(cfg, out);
  const Analysis a = runAssimilation(cfg);
  const int q = cfg.scenario.q;
  writeSwefFile(out + "/truth.swef", a.twin.truthInitial());
  writeSwefFile(out + "/background.swef", StateVector(q, a.twin.background()));
  writeSwefFile(out + "/reanalysis.swef", StateVector(q, a.xa()));
  {
    auto os = openOut(out + "/minimizer.csv");
    writeMinimizerCsv(os, a.minimizer);
  }
  {
    auto os = openOut(out + "/observations.csv");
    writeObservationsCsv(os, a.twin.problem->observations());
  }
  const Vector & truth = a.twin.truthInitial().values();
  log << "assimilate: " << a.minimizer.iterations << " iterations, J " << a.minimizer.cost.front() << " -> "
      << a.minimizer.cost.back() << ", gradient reduction " << a.minimizer.reduction()
      << (a.minimizer.converged ? "" : " (not converged: " + a.minimizer.message + ")") << '\n'
      << "  rmse vs truth: background " << rms(a.twin.background() - truth) << ", analysis "
      << rms(a.xa() - truth) << '\n';
}

void cmdImpact(const ExperimentConfig & cfg, const std::string & out, int jobs, std::ostream & log) {
  prepare(out);
  saveConfig(cfg, out);
  const Analysis a = runAssimilation(cfg);
  const SupersensitivitySystem sys = buildSystem(a, cfg.hessian);
  std::optional<DenseReference> dense;
  if (cfg.dense_reference) dense = denseReference(sys, jobs);

  PreconditionerPtr M;
  if (!cfg.preconditioners.empty()) {
    M = makePreconditioner(cfg.preconditioners.front(), cfg, a, sys, dense ? &dense->hessian : nullptr, jobs);
  }
  SolveBudget budget;
  budget.max_matvecs = cfg.budget;
  if (dense) budget.reference = dense->solution;
  const SolverReport rep = solveSupersensitivity(*sys.hessian, sys.rhs, cfg.solver, M.get(), budget);
  const ImpactResult res = observationSensitivities(*a.twin.problem, a.xa(), rep.x);

  writeImpactFields(out, *a.twin.problem, res);
  {
    auto os = openOut(out + "/impact.csv");
    writeImpactCsv(os, *a.twin.problem, res);
  }
  {
    auto os = openOut(out + "/solver_trace.csv");
    writeTraceCsv(os, {rep});
  }
  const double scoreA = forecastScore(cfg.scenario, a.xa(), sys.score);
  const double scoreB = forecastScore(cfg.scenario, a.twin.background(), sys.score);
  log << "impact: forecast score analysis " << scoreA << ", background " << scoreB << '\n'
      << "  " << rep.solver << (M ? " + " + std::string(preconditionerName(M->kind())) : std::string())
      << ": " << rep.matvecs << " products, residual " << rep.trace.front().residual << " -> "
      << rep.last().residual;
  if (dense) log << ", rmse vs dense solve " << rep.last().rmse;
  log << '\n';
}

// -----------------------------------------------------------------------------
void cmdBenchSolvers(const ExperimentConfig & cfg, const std::string & out, int jobs, std::ostream & log) {
  prepare(out);
  saveConfig(cfg, out);
  const Analysis a = runAssimilation(cfg);
  const SupersensitivitySystem sys = buildSystem(a, cfg.hessian);
  std::optional<DenseReference> dense;
  if (cfg.dense_reference) dense = denseReference(sys, jobs);

  std::vector<PreconditionerPtr> precs{nullptr};
  for (PreconditionerKind k : cfg.preconditioners) {
    precs.push_back(makePreconditioner(k, cfg, a, sys, dense ? &dense->hessian : nullptr, jobs));
  }
  struct Job {KrylovMethod method; PreconditionerPtr M;};
  std::vector<Job> runs;
  for (const auto & M : precs) {
    for (KrylovMethod m : kAllKrylovMethods) runs.push_back({m, M});
  }
  std::vector<SolverReport> reports(runs.size());
  SolveBudget budget;
  budget.max_matvecs = cfg.budget;
  if (dense) budget.reference = dense->solution;
  parallelFor(static_cast<int>(runs.size()), jobs, [&](int r) {
    reports[r] = solve(runs[r].method, *sys.hessian, sys.rhs, runs[r].M.get(), budget);
  });

  const double bnorm = sys.rhs.norm();
  const double refRms = dense ? rms(dense->solution) : std::nan("");
  auto os = openOut(out + "/bench.csv");
  os << "solver,preconditioner,matvecs,residual,rel_residual,rmse,rel_error,seconds,status\n"
     << std::setprecision(10);
  log << "bench-solvers: " << runs.size() << " runs, budget " << cfg.budget << '\n';
  for (size_t r = 0; r < runs.size(); ++r) {
    const SolverReport & rep = reports[r];
    const std::string pname = runs[r].M ? std::string(preconditionerName(runs[r].M->kind())) : "none";
    if (runs[r].M) reports[r].solver += "+" + pname;
    const IterationRecord & last = rep.last();
    os << krylovMethodName(runs[r].method) << ',' << pname << ',' << rep.matvecs << ',' << last.residual << ','
       << last.residual / bnorm << ',' << last.rmse << ',' << last.rmse / refRms << ',' << last.seconds << ','
       << (rep.breakdown ? "breakdown" : rep.converged ? "converged" : "budget") << '\n';
    log << "  " << std::left << std::setw(28) << reports[r].solver << " residual " << last.residual / bnorm;
    if (dense) log << "  rel error " << last.rmse / refRms;
    log << '\n';
  }
  {
    auto tr = openOut(out + "/bench_trace.csv");
    writeTraceCsv(tr, reports);
  }
  {
    std::vector<PreconditionerPtr> built(precs.begin() + 1, precs.end());
    auto pc = openOut(out + "/preconditioners.csv");
    writePreconditionerCsv(pc, built);
  }
}

// -----------------------------------------------------------------------------
void cmdMg(const ExperimentConfig & cfg, const std::string & out, int jobs, std::ostream & log) {
  prepare(out);
  saveConfig(cfg, out);
  const Analysis a = runAssimilation(cfg);
  const SupersensitivitySystem sys = buildSystem(a, cfg.hessian);
  std::optional<Vector> reference;
  if (cfg.dense_reference) reference = denseReference(sys, jobs).solution;

  const GridTransfer transfer(cfg.scenario.q);
  const auto coarse = coarseOperator(*sys.hessian, transfer, cfg.coarse_hessian);
  std::vector<MgSchedule> schedules = cfg.mg_schedules;
  if (schedules.empty()) {
    for (int c = 1; c <= 3; ++c) schedules.push_back(MgSchedule::even(c, cfg.budget));
  }

  SolveBudget budget;
  budget.max_matvecs = cfg.budget;
  budget.reference = reference;
  const SolverReport single = solve(KrylovMethod::GMRES, *sys.hessian, sys.rhs, nullptr, budget);

  auto summary = openOut(out + "/mg_summary.csv");
  summary << "schedule,stages,matvecs,final_residual,final_error\n" << std::setprecision(10);
  summary << "single-grid,1," << single.matvecs << ',' << single.last().residual << ',' << single.last().rmse
          << '\n';
  log << "mg: single-grid GMRES residual " << single.last().residual << ", error " << single.last().rmse << '\n';
  for (size_t s = 0; s < schedules.size(); ++s) {
    const MgReport rep = mgSolve(*sys.hessian, *coarse, transfer, sys.rhs, schedules[s], reference);
    auto os = openOut(out + "/mg_schedule" + std::to_string(s + 1) + ".csv");
    writeMgCsv(os, rep);
    std::string stages;
    for (int m : schedules[s].stages) stages += (stages.empty() ? "" : "/") + std::to_string(m);
    summary << schedules[s].cycles() << "-cycle," << stages << ',' << rep.matvecs << ','
            << rep.stages.back().residual << ',' << rep.stages.back().error << '\n';
    log << "  " << schedules[s].cycles() << " cycle(s) " << stages << ": residual " << rep.stages.back().residual
        << ", error " << rep.stages.back().error << (rep.breakdown ? " [" + rep.message + "]" : "") << '\n';
  }
}

// -----------------------------------------------------------------------------
namespace {

struct SensitivityRun {
  Analysis analysis;
  ImpactResult impact;
  StateVector finalField;
  StateVector finalImpact;
  DominantPair pair;
  DominantPair impactPair;
};

SensitivityRun sensitivityRun(const ExperimentConfig & cfg, bool faults) {
  SensitivityRun r{runAssimilation(cfg, faults), {}, {}, {}, {}, {}};
  const SupersensitivitySystem sys = buildSystem(r.analysis, cfg.hessian);
  SolveBudget budget;
  budget.max_matvecs = cfg.budget;
  const SolverReport rep = solveSupersensitivity(*sys.hessian, sys.rhs, cfg.solver, nullptr, budget);
  const FourDVar & problem = *r.analysis.twin.problem;
  r.impact = observationSensitivities(problem, r.analysis.xa(), rep.x);
  const int last = problem.observations().nTimes() - 1;
  r.finalField = sensitivityField(problem, r.impact, last);
  r.finalImpact = impactField(problem, r.impact, r.analysis.xa(), last);
  r.pair = dominantPair(sensitivityMagnitude(r.finalField), cfg.scenario.q, cfg.dominance_threshold);
  r.impactPair = dominantPair(sensitivityMagnitude(r.finalImpact), cfg.scenario.q, cfg.dominance_threshold);
  return r;
}

void writeDetection(const std::string & path, const DominantPair & d) {
  auto os = openOut(path);
  os << "rank,i,j,magnitude,ratio,dominant\n" << std::setprecision(10);
  for (size_t k = 0; k < d.top.size(); ++k) {
    os << k + 1 << ',' << d.top[k].i << ',' << d.top[k].j << ',' << d.top[k].value << ',' << d.ratio << ','
       << (d.dominant ? "true" : "false") << '\n';
  }
}

}  // namespace

FaultyOutcome runFaulty(const ExperimentConfig & cfg, int jobs, const std::string & out) {
  FaultyOutcome fo;
  SensitivityRun faulted, control;
  // The two runs are independent.
  parallelFor(2, jobs, [&](int k) {
    if (k == 0) faulted = sensitivityRun(cfg, true); else control = sensitivityRun(cfg, false);
  });
  fo.faulted = faulted.pair;
  fo.control = control.pair;
  fo.faultedImpact = faulted.impactPair;
  fo.controlImpact = control.impactPair;
  const auto sites = cfg.faultSites();
  std::set<std::pair<int, int>> expected(sites.begin(), sites.end()), found;
  for (const LocalMaximum & m : fo.faulted.top) found.insert({m.i, m.j});
  fo.detected = fo.faulted.dominant && found == expected;

  if (!out.empty()) {
    prepare(out);
    writeImpactFields(out, *faulted.analysis.twin.problem, faulted.impact);
    writeSwefFile(out + "/sens_final_faulted.swef", faulted.finalField);
    writeSwefFile(out + "/sens_final_control.swef", control.finalField);
    writeDetection(out + "/detected_sites.csv", fo.faulted);
    writeDetection(out + "/control_sites.csv", fo.control);
    writeSwefFile(out + "/impact_final_faulted.swef", faulted.finalImpact);
    writeDetection(out + "/impact_sites.csv", fo.faultedImpact);
    writeDetection(out + "/impact_control_sites.csv", fo.controlImpact);
    auto os = openOut(out + "/impact.csv");
    writeImpactCsv(os, *faulted.analysis.twin.problem, faulted.impact);
  }
  return fo;
}

void cmdFaulty(const ExperimentConfig & cfg, const std::string & out, int jobs, std::ostream & log) {
  prepare(out);
  saveConfig(cfg, out);
  const FaultyOutcome fo = runFaulty(cfg, jobs, out);
  auto describe = [&](const char * label, const DominantPair & d) {
    log << "  " << label << ":";
    for (const LocalMaximum & m : d.top) log << " (" << m.i << "," << m.j << ") " << m.value;
    log << "  ratio " << d.ratio << (d.dominant ? "  dominant pair" : "  no dominant pair") << '\n';
  };
  log << "faulty: sites";
  for (const auto & [i, j] : cfg.faultSites()) log << " (" << i << "," << j << ")";
  log << '\n';
  describe("faulted sensitivity", fo.faulted);
  describe("control sensitivity", fo.control);
  describe("faulted impact", fo.faultedImpact);
  describe("control impact", fo.controlImpact);
  log << "  detection " << (fo.detected ? "matches the fault sites" : "does not match the fault sites") << '\n';
}

}  // namespace obsimpact
