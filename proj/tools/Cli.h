/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_TOOLS_CLI_H_
#define OBSIMPACT_TOOLS_CLI_H_

#include <iosfwd>

namespace obsimpact {

/// obs-impact <simulate|assimilate|impact|bench-solvers|mg|faulty>
///            --config PATH [--jobs N] [--out DIR]
/// Returns the process exit code; errors are reported on `err` as
/// "error: <Name>: <message>".
int runCli(int argc, const char * const * argv, std::ostream & out, std::ostream & err);

}  // namespace obsimpact

#endif  // OBSIMPACT_TOOLS_CLI_H_
