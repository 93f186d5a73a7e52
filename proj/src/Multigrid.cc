/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/Multigrid.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include "obsimpact/Errors.h"
#include "obsimpact/Krylov.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
GridTransfer::GridTransfer(int fineQ) : fineQ_(fineQ) {
  if (fineQ < 2 || fineQ % 2 != 0) throw OddGrid("grid transfer needs an even q, got " + std::to_string(fineQ));
}

Vector GridTransfer::restriction(const Vector & fine) const {
  const StateLayout f(fineQ_), c(coarseQ());
  if (fine.size() != f.size()) throw DimensionMismatch("restriction input has the wrong length");
  Vector out(c.size());
  for (int v = 0; v < 3; ++v) {
    const Var var = static_cast<Var>(v);
    for (int I = 0; I < c.q(); ++I) {
      for (int J = 0; J < c.q(); ++J) {
        out[c.index(var, I, J)] = 0.25 * (fine[f.index(var, 2 * I, 2 * J)] + fine[f.index(var, 2 * I, 2 * J + 1)] +
                                          fine[f.index(var, 2 * I + 1, 2 * J)] +
                                          fine[f.index(var, 2 * I + 1, 2 * J + 1)]);
      }
    }
  }
  return out;
}

Vector GridTransfer::prolongation(const Vector & coarse) const {
  const StateLayout f(fineQ_), c(coarseQ());
  if (coarse.size() != c.size()) throw DimensionMismatch("prolongation input has the wrong length");
  Vector out(f.size());
  for (int v = 0; v < 3; ++v) {
    const Var var = static_cast<Var>(v);
    for (int i = 0; i < fineQ_; ++i) {
      for (int j = 0; j < fineQ_; ++j) out[f.index(var, i, j)] = coarse[c.index(var, i / 2, j / 2)];
    }
  }
  return out;
}

// -----------------------------------------------------------------------------
std::shared_ptr<const FourDVar> coarseProblem(const FourDVar & fine, const GridTransfer & transfer) {
  const ScenarioConfig & fcfg = fine.config();
  if (fcfg.q != transfer.fineQ()) throw DimensionMismatch("transfer does not match the problem grid");
  ScenarioConfig cfg = fcfg;
  cfg.q = transfer.coarseQ();
  cfg.bg_corr_length = fcfg.bg_corr_length / 2.0;
  cfg.validate();

  const BackgroundCovariance & Bf = fine.covariance();
  auto B = std::make_shared<const BackgroundCovariance>(cfg.q, transfer.restriction(Bf.stddev()),
                                                        cfg.bg_corr_length, Bf.nugget());

  const ObservationSet & of = fine.observations();
  std::vector<std::vector<ObsSite>> selectors;
  std::vector<Vector> values, sigmas;
  for (int k = 0; k < of.nTimes(); ++k) {
    // Block-average the observed fine sites of each (variable, coarse cell).
    struct Acc {double value = 0.0; double sigma = 0.0; int n = 0;};
    std::map<std::tuple<int, int, int>, Acc> blocks;
    const auto & sel = of.selector(k);
    for (size_t m = 0; m < sel.size(); ++m) {
      Acc & a = blocks[{static_cast<int>(sel[m].var), sel[m].i / 2, sel[m].j / 2}];
      a.value += of.values(k)[m];
      a.sigma += of.sigma(k)[m];
      ++a.n;
    }
    std::vector<ObsSite> s;
    Vector y(blocks.size()), sd(blocks.size());
    int m = 0;
    for (const auto & [key, a] : blocks) {
      s.push_back({static_cast<Var>(std::get<0>(key)), std::get<1>(key), std::get<2>(key)});
      y[m] = a.value / a.n;
      sd[m] = a.sigma / a.n;
      ++m;
    }
    selectors.push_back(std::move(s));
    values.push_back(std::move(y));
    sigmas.push_back(std::move(sd));
  }
  auto obs = std::make_shared<const ObservationSet>(cfg.q, of.steps(), std::move(selectors),
                                                    std::move(values), std::move(sigmas));
  return std::make_shared<const FourDVar>(cfg, B, transfer.restriction(fine.background()), obs);
}

std::shared_ptr<HessianOperator> coarseOperator(const HessianOperator & fine, const GridTransfer & transfer,
                                                HessianVariant variant) {
  auto problem = coarseProblem(fine.problem(), transfer);
  return std::make_shared<HessianOperator>(problem, transfer.restriction(fine.point()), variant);
}

// -----------------------------------------------------------------------------
int MgSchedule::budget() const {
  return std::accumulate(stages.begin(), stages.end(), 0);
}

MgSchedule MgSchedule::even(int nCycles, int budget) {
  if (nCycles < 1) throw ConfigError("multigrid needs at least one cycle");
  const int count = 2 * nCycles + 1;
  if (budget < count) throw ConfigError("multigrid budget smaller than the number of stages");
  MgSchedule s;
  s.stages.assign(count, budget / count);
  s.stages.back() += budget % count;
  return s;
}

void MgSchedule::validate() const {
  if (stages.size() < 3 || stages.size() % 2 == 0) {
    throw ConfigError("multigrid schedule needs an odd number (>= 3) of stages F,C,...,F");
  }
  for (int m : stages) {
    if (m < 1) throw ConfigError("every multigrid stage needs at least one product");
  }
}

// -----------------------------------------------------------------------------
MgReport mgSolve(const LinearOperator & fine, const LinearOperator & coarse, const GridTransfer & transfer,
                 const Vector & b, const MgSchedule & schedule, const std::optional<Vector> & reference) {
  schedule.validate();
  const int n = fine.size();
  if (b.size() != n) throw DimensionMismatch("right-hand side length does not match operator");
  if (n != 3 * transfer.fineQ() * transfer.fineQ() || coarse.size() != 3 * transfer.coarseQ() * transfer.coarseQ()) {
    throw DimensionMismatch("operators do not match the grid transfer");
  }
  if (reference && reference->size() != n) throw DimensionMismatch("reference solution length mismatch");

  MgReport rep;
  Vector x = Vector::Zero(n);
  Vector r = b;
  auto snapshot = [&](int cycle, char level) {
    MgStageRecord s;
    s.cycle = cycle;
    s.level = level;
    s.matvecs = rep.matvecs;
    s.residual = r.norm();
    s.error = reference ? (x - *reference).norm() / std::sqrt(double(n)) : std::numeric_limits<double>::quiet_NaN();
    return s;
  };
  rep.initial = snapshot(0, 'I');

  const int nCycles = schedule.cycles();
  for (size_t st = 0; st < schedule.stages.size(); ++st) {
    const int alloc = schedule.stages[st];
    const int cycle = std::min(static_cast<int>(st) / 2 + 1, nCycles);
    SolveBudget budget;
    if (st % 2 == 0) {
      budget.max_matvecs = alloc;
      const SolverReport s = solve(KrylovMethod::GMRES, fine, r, nullptr, budget);
      x += s.x;
      r = s.residual;
      rep.matvecs += s.matvecs;
      if (s.breakdown) {rep.breakdown = true; rep.message += "fine stage " + std::to_string(st) + ": " + s.message + "; ";}
      rep.stages.push_back(snapshot(cycle, 'F'));
    } else {
      const Vector rc = transfer.restriction(r);
      if (alloc > 1 && rc.squaredNorm() > 0.0) {
        budget.max_matvecs = alloc - 1;
        const SolverReport s = solve(KrylovMethod::GMRES, coarse, rc, nullptr, budget);
        rep.matvecs += s.matvecs;
        if (s.breakdown) {rep.breakdown = true; rep.message += "coarse stage " + std::to_string(st) + ": " + s.message + "; ";}
        if (s.x.squaredNorm() > 0.0) {
          const Vector e = transfer.prolongation(s.x);
          x += e;
          r -= fine.apply(e);
          ++rep.matvecs;
        }
      }
      rep.stages.push_back(snapshot(cycle, 'C'));
    }
  }
  rep.x = std::move(x);
  if (rep.message.empty()) rep.message = "schedule completed";
  return rep;
}

void writeMgCsv(std::ostream & os, const MgReport & report) {
  os << "cycle,level,matvecs,residual,error\n" << std::setprecision(17);
  auto row = [&](const MgStageRecord & s) {
    os << s.cycle << ',' << s.level << ',' << s.matvecs << ',' << s.residual << ',' << s.error << '\n';
  };
  row(report.initial);
  for (const MgStageRecord & s : report.stages) row(s);
}

}  // namespace obsimpact
