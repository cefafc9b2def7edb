#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "beals/config.hpp"
#include "beals/magnetic_geometry.hpp"
#include "beals/reconstruction.hpp"
#include "beals/symbol.hpp"

namespace beals {

struct ExperimentConfig {
  std::string command;

  // [grid]
  int dim = 1;
  double L = 8.0;
  int N = 512;
  bool commensurate = false;  // N from frame.M, L as the minimal half-width

  // [field]; kind "none" means non-magnetic
  std::string field_kind = "none";
  double b = 1.0;
  Box field_box = Box::cube(2, -3.0, 3.0);
  Point base;
  QuadratureRule rule;

  // [frame]
  int Gamma = 7;
  int M = 16;
  std::string window = "bump";

  SymbolSpec symbol;
  RegularizationSchedule schedule;

  // [roundtrip]
  double t_half = 2.0;
  double xi_half = 2.0;
  int xi_count = 41;
  int band = -1;
  bool negative_control = false;
  DecayOptions decay;
  int ratio_shell = 8;  // |m - m'| shell compared against shell 0

  // [gauge]
  std::string gauge_kind = "landau";  // none | landau | polynomial

  // [sampling]
  int samples = 10000;
  int functions = 5;
  int triples = 100;
  unsigned long long seed = 1;

  std::string out_dir = "out";
  int workers = 1;
  bool save_arrays = false;

  std::map<std::string, double> thresholds;
  std::map<std::string, std::string> echo;

  bool magnetic() const { return field_kind != "none"; }
  double threshold(const std::string& name) const;
  MagneticField field() const;
};

/// Reads and validates the config for `command`; unknown keys and invalid values raise ConfigError.
ExperimentConfig load_experiment_config(const Config& c, const std::string& command);

struct Check {
  std::string name;
  double value = 0.0;
  std::string op;  // "<=", "<" or ">="
  double tolerance = 0.0;
  bool pass = false;
};

struct RunReport {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
  std::vector<Check> checks;
  std::vector<std::string> files;
  double seconds = 0.0;

  const Check& check(const std::string& name, double value, const std::string& op, double tolerance);
  bool passed() const;
  /// Everything except "timing" is a pure function of config and seed.
  nlohmann::json to_json() const;
};

RunReport cmd_frame_check(const ExperimentConfig& cfg);
RunReport cmd_geometry_check(const ExperimentConfig& cfg);
RunReport cmd_roundtrip(const ExperimentConfig& cfg);
RunReport cmd_gauge_check(const ExperimentConfig& cfg);

/// Dispatches on cfg.command and writes <out_dir>/<command>.json.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace beals
