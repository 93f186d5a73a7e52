/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/StateVector.h"

#include <string>

#include "obsimpact/Errors.h"

namespace obsimpact {

// -----------------------------------------------------------------------------
std::string_view varName(Var v) {
  switch (v) {
    case Var::H: return "h";
    case Var::UH: return "uh";
    case Var::VH: return "vh";
  }
  return "?";
}

Var varFromName(std::string_view name) {
  if (name == "h") return Var::H;
  if (name == "uh" || name == "u") return Var::UH;
  if (name == "vh" || name == "v") return Var::VH;
  throw ConfigError("unknown variable name '" + std::string(name) + "'");
}

// -----------------------------------------------------------------------------
StateVector::StateVector(int q, Vector values) : q_(q), values_(std::move(values)) {
  if (values_.size() != 3 * q * q) {
    throw DimensionMismatch("state vector length " + std::to_string(values_.size()) +
                            " does not match 3 q^2 = " + std::to_string(3 * q * q));
  }
}

}  // namespace obsimpact
