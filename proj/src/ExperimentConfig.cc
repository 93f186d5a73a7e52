/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "obsimpact/ExperimentConfig.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "obsimpact/Errors.h"

namespace obsimpact {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split(const std::string & s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parseNumber(const std::string & s) {
  T v{};
  const char * end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + s + "' is not a valid number");
  return v;
}

bool parseBool(const std::string & s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("'" + s + "' is not a boolean (true/false)");
}

std::string join(const std::vector<std::string> & items, const char * sep) {
  std::string out;
  for (size_t k = 0; k < items.size(); ++k) out += (k ? sep : "") + items[k];
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct Key {
  std::function<void(ExperimentConfig &, const std::string &)> set;
  std::function<std::string(const ExperimentConfig &)> get;
};

template <typename T>
Key number(T ExperimentConfig::*field) {
  return {[field](ExperimentConfig & c, const std::string & s) {c.*field = parseNumber<T>(s);},
          [field](const ExperimentConfig & c) {
            if constexpr (std::is_floating_point_v<T>) return fmt(c.*field); else return std::to_string(c.*field);
          }};
}

template <typename T>
Key scenario(T ScenarioConfig::*field) {
  return {[field](ExperimentConfig & c, const std::string & s) {c.scenario.*field = parseNumber<T>(s);},
          [field](const ExperimentConfig & c) {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt(c.scenario.*field);
            } else {
              return std::to_string(c.scenario.*field);
            }
          }};
}

Key flag(bool ExperimentConfig::*field) {
  return {[field](ExperimentConfig & c, const std::string & s) {c.*field = parseBool(s);},
          [field](const ExperimentConfig & c) {return std::string(c.*field ? "true" : "false");}};
}

const std::map<std::string, Key> & keys() {
  static const std::map<std::string, Key> table = {
    {"q", scenario(&ScenarioConfig::q)},
    {"domain_half_width", scenario(&ScenarioConfig::domain_half_width)},
    {"g", scenario(&ScenarioConfig::g)},
    {"dt", scenario(&ScenarioConfig::dt)},
    {"n_steps_window", scenario(&ScenarioConfig::n_steps_window)},
    {"obs_every", scenario(&ScenarioConfig::obs_every)},
    {"n_steps_verify", scenario(&ScenarioConfig::n_steps_verify)},
    {"seed", scenario(&ScenarioConfig::seed)},
    {"h_base", scenario(&ScenarioConfig::h_base)},
    {"bell_amplitude", scenario(&ScenarioConfig::bell_amplitude)},
    {"bell_width", scenario(&ScenarioConfig::bell_width)},
    {"u_const", scenario(&ScenarioConfig::u_const)},
    {"v_const", scenario(&ScenarioConfig::v_const)},
    {"bg_std_fraction", scenario(&ScenarioConfig::bg_std_fraction)},
    {"bg_std_floor_fraction", scenario(&ScenarioConfig::bg_std_floor_fraction)},
    {"bg_corr_length", scenario(&ScenarioConfig::bg_corr_length)},
    {"bg_corr_nugget", scenario(&ScenarioConfig::bg_corr_nugget)},
    {"obs_std_fraction", scenario(&ScenarioConfig::obs_std_fraction)},
    {"obs_stride", scenario(&ScenarioConfig::obs_stride)},
    {"obs_at_initial_time",
     {[](ExperimentConfig & c, const std::string & s) {c.scenario.obs_at_initial_time = parseBool(s);},
      [](const ExperimentConfig & c) {return std::string(c.scenario.obs_at_initial_time ? "true" : "false");}}},

    {"out_dir",
     {[](ExperimentConfig & c, const std::string & s) {c.out_dir = s;},
      [](const ExperimentConfig & c) {return c.out_dir;}}},
    {"simulate_steps", number(&ExperimentConfig::simulate_steps)},
    {"snapshot_stride", number(&ExperimentConfig::snapshot_stride)},
    {"obs_noise_scale", number(&ExperimentConfig::obs_noise_scale)},
    {"start_from_truth", flag(&ExperimentConfig::start_from_truth)},
    {"max_iters", number(&ExperimentConfig::max_iters)},
    {"grad_tol_rel", number(&ExperimentConfig::grad_tol_rel)},
    {"hessian",
     {[](ExperimentConfig & c, const std::string & s) {c.hessian = hessianVariantFromName(s);},
      [](const ExperimentConfig & c) {return std::string(hessianVariantName(c.hessian));}}},
    {"coarse_hessian",
     {[](ExperimentConfig & c, const std::string & s) {c.coarse_hessian = hessianVariantFromName(s);},
      [](const ExperimentConfig & c) {return std::string(hessianVariantName(c.coarse_hessian));}}},
    {"solver",
     {[](ExperimentConfig & c, const std::string & s) {c.solver = krylovMethodFromName(s);},
      [](const ExperimentConfig & c) {return std::string(krylovMethodName(c.solver));}}},
    {"preconditioners",
     {[](ExperimentConfig & c, const std::string & s) {
        c.preconditioners.clear();
        for (const std::string & name : split(s, ',')) {
          if (name != "none") c.preconditioners.push_back(preconditionerFromName(name));
        }
      },
      [](const ExperimentConfig & c) {
        std::vector<std::string> names;
        for (PreconditionerKind k : c.preconditioners) names.emplace_back(preconditionerName(k));
        return names.empty() ? std::string("none") : join(names, ", ");
      }}},
    {"budget", number(&ExperimentConfig::budget)},
    {"dense_reference", flag(&ExperimentConfig::dense_reference)},
    {"lanczos_k", number(&ExperimentConfig::lanczos_k)},
    {"lanczos_max_matvecs", number(&ExperimentConfig::lanczos_max_matvecs)},
    {"rsvd_ell", number(&ExperimentConfig::rsvd_ell)},
    {"lbfgs_pairs", number(&ExperimentConfig::lbfgs_pairs)},
    {"mg_schedules",
     {[](ExperimentConfig & c, const std::string & s) {
        c.mg_schedules.clear();
        for (const std::string & sched : split(s, ',')) {
          MgSchedule m;
          for (const std::string & st : split(sched, '/')) m.stages.push_back(parseNumber<int>(st));
          c.mg_schedules.push_back(std::move(m));
        }
      },
      [](const ExperimentConfig & c) {
        std::vector<std::string> out;
        for (const MgSchedule & m : c.mg_schedules) {
          std::vector<std::string> st;
          for (int a : m.stages) st.push_back(std::to_string(a));
          out.push_back(join(st, "/"));
        }
        return join(out, ", ");
      }}},
    {"fault_sites",
     {[](ExperimentConfig & c, const std::string & s) {
        c.fault_sites.clear();
        if (s == "default") return;
        for (const std::string & site : split(s, ',')) {
          const auto ij = split(site, ':');
          if (ij.size() != 2) throw ConfigError("fault site '" + site + "' must be i:j");
          c.fault_sites.emplace_back(parseNumber<int>(ij[0]), parseNumber<int>(ij[1]));
        }
      },
      [](const ExperimentConfig & c) {
        std::vector<std::string> out;
        for (const auto & [i, j] : c.fault_sites) out.push_back(std::to_string(i) + ":" + std::to_string(j));
        return out.empty() ? std::string("default") : join(out, ", ");
      }}},
    {"fault_mode",
     {[](ExperimentConfig & c, const std::string & s) {
        if (s == "multiplicative") {
          c.fault.mode = FaultMode::Multiplicative;
        } else if (s == "additive") {
          c.fault.mode = FaultMode::Additive;
        } else {
          throw ConfigError("fault_mode must be multiplicative or additive");
        }
      },
      [](const ExperimentConfig & c) {
        return std::string(c.fault.mode == FaultMode::Multiplicative ? "multiplicative" : "additive");
      }}},
    {"fault_magnitude",
     {[](ExperimentConfig & c, const std::string & s) {c.fault.magnitude = parseNumber<double>(s);},
      [](const ExperimentConfig & c) {return fmt(c.fault.magnitude);}}},
    {"dominance_threshold", number(&ExperimentConfig::dominance_threshold)},
  };
  return table;
}

}  // namespace

// -----------------------------------------------------------------------------
std::vector<std::pair<int, int>> ExperimentConfig::faultSites() const {
  if (!fault_sites.empty()) return fault_sites;
  const int q = scenario.q;
  return {{q / 4, q / 2}, {3 * q / 4, q / 2}};
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (simulate_steps < 0) throw ConfigError("simulate_steps must be >= 0");
  if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  if (obs_noise_scale < 0.0) throw ConfigError("obs_noise_scale must be >= 0");
  if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (budget < 1) throw ConfigError("budget must be >= 1");
  if (lanczos_k < 0 || lanczos_max_matvecs < 1) throw ConfigError("invalid Lanczos settings");
  if (rsvd_ell < 1) throw ConfigError("rsvd_ell must be >= 1");
  if (lbfgs_pairs < 1) throw ConfigError("lbfgs_pairs must be >= 1");
  for (const MgSchedule & m : mg_schedules) m.validate();
  for (const auto & [i, j] : fault_sites) {
    if (!StateLayout(scenario.q).inside(i, j)) {
      throw ConfigError("fault site " + std::to_string(i) + ":" + std::to_string(j) + " is outside the grid");
    }
  }
  if (!(dominance_threshold > 1.0)) throw ConfigError("dominance_threshold must exceed 1");
}

ExperimentConfig parseExperimentConfig(std::istream & is) {
  ExperimentConfig cfg;
  std::string line;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(lineNo) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = keys().find(key);
    if (it == keys().end()) throw ConfigError(where + "unknown key '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const Error & e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig loadExperimentConfig(const std::string & path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parseExperimentConfig(in);
}

void writeExperimentConfig(std::ostream & os, const ExperimentConfig & cfg) {
  for (const auto & [key, k] : keys()) os << key << " = " << k.get(cfg) << '\n';
}

}  // namespace obsimpact
