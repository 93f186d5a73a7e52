/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_ERRORS_H_
#define OBSIMPACT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace obsimpact {

// -----------------------------------------------------------------------------
/// Base of every error surfaced by the library. name() is the structured
/// error name printed by the command-line driver.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string & what)
    : std::runtime_error(what), name_(std::move(name)) {}
  const std::string & name() const {return name_;}

 private:
  std::string name_;
};

// -----------------------------------------------------------------------------
#define OBSIMPACT_DEFINE_ERROR(Type)                                           \
  class Type : public Error {                                                  \
   public:                                                                     \
    explicit Type(const std::string & what) : Error(#Type, what) {}            \
  };

OBSIMPACT_DEFINE_ERROR(ConfigError)
OBSIMPACT_DEFINE_ERROR(DimensionMismatch)
OBSIMPACT_DEFINE_ERROR(FactorizationFailure)
OBSIMPACT_DEFINE_ERROR(IndexOutOfRange)
OBSIMPACT_DEFINE_ERROR(IoError)
OBSIMPACT_DEFINE_ERROR(NoValidPairs)
OBSIMPACT_DEFINE_ERROR(NonFiniteState)
OBSIMPACT_DEFINE_ERROR(NonPositiveDepth)
OBSIMPACT_DEFINE_ERROR(NonPositiveRitzValue)
OBSIMPACT_DEFINE_ERROR(OddGrid)
OBSIMPACT_DEFINE_ERROR(RankDeficientSketch)
OBSIMPACT_DEFINE_ERROR(SiteNotObserved)
OBSIMPACT_DEFINE_ERROR(SizeGuard)
OBSIMPACT_DEFINE_ERROR(TrajectoryMismatch)

#undef OBSIMPACT_DEFINE_ERROR

// -----------------------------------------------------------------------------
/// Model failure raised while propagating; carries the failing step index.
class PropagationError : public Error {
 public:
  PropagationError(const Error & cause, int step)
    : Error(cause.name(), std::string(cause.what()) + " (at step " + std::to_string(step) + ")"),
      step_(step) {}
  int step() const {return step_;}

 private:
  int step_;
};

}  // namespace obsimpact

#endif  // OBSIMPACT_ERRORS_H_
