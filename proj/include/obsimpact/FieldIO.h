/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_FIELDIO_H_
#define OBSIMPACT_FIELDIO_H_

#include <iosfwd>
#include <string>

#include "obsimpact/StateVector.h"

namespace obsimpact {

/// SWEF grid-field binary: "SWEF", u32 version (1), u32 q, u32 nvars (3),
/// then 3 q^2 f64 in (h, uh, vh) row-major order; all little-endian.
void writeSwef(std::ostream & os, const StateVector & x);
StateVector readSwef(std::istream & is);

void writeSwefFile(const std::string & path, const StateVector & x);
StateVector readSwefFile(const std::string & path);

/// CSV with header "var,i,j,value".
void writeFieldCsv(std::ostream & os, const StateVector & x);

}  // namespace obsimpact

#endif  // OBSIMPACT_FIELDIO_H_
