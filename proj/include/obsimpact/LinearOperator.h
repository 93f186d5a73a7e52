/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_LINEAROPERATOR_H_
#define OBSIMPACT_LINEAROPERATOR_H_

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "obsimpact/Errors.h"
#include "obsimpact/StateVector.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Matrix-free square operator.  Symmetric unless applyTranspose is overridden.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual int size() const = 0;
  virtual Vector apply(const Vector & v) const = 0;
  virtual Vector applyTranspose(const Vector & v) const {return apply(v);}

 protected:
  void checkSize(const Vector & v) const {
    if (v.size() != size()) {
      throw DimensionMismatch("operator of size " + std::to_string(size()) +
                              " applied to vector of length " + std::to_string(v.size()));
    }
  }
};

using OperatorPtr = std::shared_ptr<const LinearOperator>;

// -----------------------------------------------------------------------------
class DenseOperator : public LinearOperator {
 public:
  explicit DenseOperator(Matrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw DimensionMismatch("dense operator must be square");
  }
  int size() const override {return static_cast<int>(a_.rows());}
  Vector apply(const Vector & v) const override {checkSize(v); return a_ * v;}
  Vector applyTranspose(const Vector & v) const override {checkSize(v); return a_.transpose() * v;}
  const Matrix & matrix() const {return a_;}

 private:
  Matrix a_;
};

// -----------------------------------------------------------------------------
class FunctionOperator : public LinearOperator {
 public:
  using Fn = std::function<Vector(const Vector &)>;

  FunctionOperator(int n, Fn apply, Fn transpose = {})
    : n_(n), apply_(std::move(apply)), transpose_(std::move(transpose)) {}
  int size() const override {return n_;}
  Vector apply(const Vector & v) const override {checkSize(v); return apply_(v);}
  Vector applyTranspose(const Vector & v) const override {
    checkSize(v);
    return transpose_ ? transpose_(v) : apply_(v);
  }

 private:
  int n_;
  Fn apply_;
  Fn transpose_;
};

// -----------------------------------------------------------------------------
class IdentityOperator : public LinearOperator {
 public:
  explicit IdentityOperator(int n) : n_(n) {}
  int size() const override {return n_;}
  Vector apply(const Vector & v) const override {checkSize(v); return v;}

 private:
  int n_;
};

}  // namespace obsimpact

#endif  // OBSIMPACT_LINEAROPERATOR_H_
