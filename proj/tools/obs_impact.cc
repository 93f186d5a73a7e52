/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <iostream>

#include "Cli.h"

int main(int argc, char ** argv) {
  return obsimpact::runCli(argc, argv, std::cout, std::cerr);
}
