/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_STATEVECTOR_H_
#define OBSIMPACT_STATEVECTOR_H_

#include <Eigen/Dense>

#include <string_view>

namespace obsimpact {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Prognostic variables in flattening order.
enum class Var : int {H = 0, UH = 1, VH = 2};

std::string_view varName(Var v);
Var varFromName(std::string_view name);

// -----------------------------------------------------------------------------
/// Index arithmetic of the flattened (h, uh, vh) layout on a q x q grid.
/// Row index i runs along y, column index j along x; each field is row-major.
class StateLayout {
 public:
  explicit StateLayout(int q) : q_(q) {}

  int q() const {return q_;}
  int cells() const {return q_ * q_;}
  int size() const {return 3 * q_ * q_;}
  int cell(int i, int j) const {return i * q_ + j;}
  int index(Var v, int i, int j) const {return static_cast<int>(v) * cells() + cell(i, j);}
  int offset(Var v) const {return static_cast<int>(v) * cells();}
  bool inside(int i, int j) const {return i >= 0 && i < q_ && j >= 0 && j < q_;}

 private:
  int q_;
};

// -----------------------------------------------------------------------------
/// Discrete shallow-water state; perturbations, adjoint variables and
/// sensitivities share the same layout and are carried as plain Vector.
class StateVector {
 public:
  StateVector() : q_(0) {}
  explicit StateVector(int q) : q_(q), values_(Vector::Zero(3 * q * q)) {}
  StateVector(int q, Vector values);

  int q() const {return q_;}
  int size() const {return static_cast<int>(values_.size());}
  StateLayout layout() const {return StateLayout(q_);}

  const Vector & values() const {return values_;}
  Vector & values() {return values_;}

  double operator()(Var v, int i, int j) const {return values_[layout().index(v, i, j)];}
  double & operator()(Var v, int i, int j) {return values_[layout().index(v, i, j)];}

  auto field(Var v) const {return values_.segment(layout().offset(v), q_ * q_);}
  auto field(Var v) {return values_.segment(layout().offset(v), q_ * q_);}

  bool allFinite() const {return values_.allFinite();}

 private:
  int q_;
  Vector values_;
};

}  // namespace obsimpact

#endif  // OBSIMPACT_STATEVECTOR_H_
