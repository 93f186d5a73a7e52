/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_MULTIGRID_H_
#define OBSIMPACT_MULTIGRID_H_

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "obsimpact/FourDVar.h"
#include "obsimpact/LinearOperator.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Transfers between a q x q grid and the q/2 x q/2 grid of its 2 x 2 blocks,
/// applied to each variable of the (h, uh, vh) layout.  Restriction takes the
/// block mean; prolongation copies a coarse value into its four fine cells,
/// which is 4 R^T, so that R P = I.
class GridTransfer {
 public:
  /// Throws OddGrid.
  explicit GridTransfer(int fineQ);
  int fineQ() const {return fineQ_;}
  int coarseQ() const {return fineQ_ / 2;}
  Vector restriction(const Vector & fine) const;
  Vector prolongation(const Vector & coarse) const;

 private:
  int fineQ_;
};

// -----------------------------------------------------------------------------
/// The assimilation problem re-posed on the coarse grid: same physical
/// correlation length (L halved in grid points), restricted background and
/// background standard deviations, observations averaged over the fine
/// observed cells of each block with the fine error standard deviations.
std::shared_ptr<const FourDVar> coarseProblem(const FourDVar & fine, const GridTransfer & transfer);

/// Hessian of the coarse problem at the restricted linearization point.
std::shared_ptr<HessianOperator> coarseOperator(const HessianOperator & fine, const GridTransfer & transfer,
                                                HessianVariant variant = HessianVariant::GaussNewton);

// -----------------------------------------------------------------------------
/// Operator-application allocation of the stages F, C, F, ..., C, F.
struct MgSchedule {
  std::vector<int> stages;

  int cycles() const {return static_cast<int>(stages.size()) / 2;}
  int budget() const;
  /// The budget split evenly over 2 n + 1 stages, remainder to the last
  /// fine stage (33/33/34, 20 x 5 and 14 x 6 + 16 for a budget of 100).
  static MgSchedule even(int nCycles, int budget = 100);
  /// Throws ConfigError unless the stage count is odd and every entry >= 1.
  void validate() const;
};

struct MgStageRecord {
  int cycle = 0;
  char level = 'F';   // 'F' fine smoothing, 'C' coarse correction
  int matvecs = 0;    // cumulative
  double residual = 0.0;   // |b - A x| on the fine grid
  double error = 0.0;      // |x - reference| / sqrt(n), NaN without reference
};

struct MgReport {
  MgStageRecord initial;
  std::vector<MgStageRecord> stages;
  Vector x;
  int matvecs = 0;
  bool breakdown = false;
  std::string message;
};

/// Two-level correction scheme with GMRES on both levels.  A fine stage with
/// allocation m smooths the residual equation with m products.  A coarse
/// stage solves A_c e_c = R r with m - 1 coarse products and spends the last
/// one on the fine residual after adding P e_c.
MgReport mgSolve(const LinearOperator & fine, const LinearOperator & coarse, const GridTransfer & transfer,
                 const Vector & b, const MgSchedule & schedule,
                 const std::optional<Vector> & reference = std::nullopt);

/// CSV with header "cycle,level,matvecs,residual,error"; the initial guess is
/// written as cycle 0, level I.
void writeMgCsv(std::ostream & os, const MgReport & report);

}  // namespace obsimpact

#endif  // OBSIMPACT_MULTIGRID_H_
