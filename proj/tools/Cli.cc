/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "Cli.h"

#include <exception>
#include <functional>
#include <map>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "obsimpact/Errors.h"
#include "obsimpact/ExperimentConfig.h"
#include "obsimpact/Experiments.h"

namespace obsimpact {

namespace {

using Command = std::function<void(const ExperimentConfig &, const std::string &, int, std::ostream &)>;

const std::map<std::string, Command> & commands() {
  static const std::map<std::string, Command> table = {
    {"simulate", [](const auto & c, const auto & o, int, auto & log) {cmdSimulate(c, o, log);}},
    {"assimilate", [](const auto & c, const auto & o, int, auto & log) {cmdAssimilate(c, o, log);}},
    {"impact", cmdImpact},
    {"bench-solvers", cmdBenchSolvers},
    {"mg", cmdMg},
    {"faulty", cmdFaulty},
  };
  return table;
}

}  // namespace

// -----------------------------------------------------------------------------
int runCli(int argc, const char * const * argv, std::ostream & out, std::ostream & err) {
  CLI::App app{"Observation impact in 4D-Var on a shallow-water twin", "obs-impact"};
  app.require_subcommand(1, 1);

  std::string configPath;
  std::string outDir;
  int jobs = 1;
  for (const auto & [name, cmd] : commands()) {
    CLI::App * sub = app.add_subcommand(name);
    sub->add_option("--config", configPath, "key = value configuration file")->required();
    sub->add_option("--jobs", jobs, "worker threads (capped by OBS_IMPACT_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--out", outDir, "output directory (overrides out_dir)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError & e) {
    err << "error: UsageError: " << e.what() << '\n' << app.help();
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg = loadExperimentConfig(configPath);
    if (!outDir.empty()) cfg.out_dir = outDir;
    commands().at(name)(cfg, cfg.out_dir, resolveJobs(jobs), out);
  } catch (const Error & e) {
    err << "error: " << e.name() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception & e) {
    err << "error: InternalError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace obsimpact
