#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lens::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kBracketFailure = 3, kMonitorViolation = 4 };

/// Everything a run depends on; echoed verbatim into every JSON output.
struct RunConfig {
  std::string command;
  std::optional<double> a;
  double a_lo = 0.05;
  double a_hi = 1.4142135623730951;
  double series_tol = 1e-14;
  double ode_abs = 1e-12;
  double ode_rel = 1e-12;
  double event_tol = 1e-12;
  double tol_a = 1e-10;
  int order = 64;
  double x_seed = 1e-3;
  std::string output_dir;
  bool json = false;
  // table
  double from = 0.05, to = 1.4142135623730951, step = 0.05;
  unsigned jobs = 1;
  int samples = 8;
  // mesh
  int n_theta = 64;
  int n_s = 256;
  double annulus_outer = 0.0;

  void validate() const;
};

nlohmann::json config_json(const RunConfig& cfg);

/// Parses a height; accepts plain numbers and "sqrt2".
double parse_height(const std::string& text);

/// Parses argv-style arguments (without the program name) and runs the command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already parsed configuration.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace lens::cli
