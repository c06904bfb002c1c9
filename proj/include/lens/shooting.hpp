#pragma once

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lens/arclength_curve.hpp"
#include "lens/graph_profile.hpp"
#include "lens/series_core.hpp"

namespace lens {

/// Every tolerance and switch of the series -> graph -> arclength pipeline.
struct PipelineConfig {
  int order = 64;
  double series_tol = 1e-14;
  int max_iter = 200;
  double r_cap = 0.5;  ///< upper limit on the series radius
  double x_seed = 1e-3;
  GraphOptions graph{};
  ArcOptions arc{};

  /// Same configuration with every integration and solver tolerance divided by `factor`.
  [[nodiscard]] PipelineConfig tightened(double factor) const;
  void set_ode_tolerances(double abs_tol, double rel_tol);
};

nlohmann::json config_to_json(const PipelineConfig& cfg);

struct AngleResult {
  double alpha = 0.0;
  LensProfile profile;
  ProfileTrajectory graph;
  PicardResult series;
};

/// Full pipeline for one height a in (0, sqrt 2].
AngleResult angle_of(double a, const PipelineConfig& cfg = {});

/// u'(s_bar) - 1/2 for a computed profile.
double lens_defect(const LensProfile& p);

struct AngleRow {
  double a = 0.0;
  double s_bar = 0.0;
  double xi = 0.0;
  double alpha = 0.0;
  bool monitor_pass = false;
  std::string error;  ///< empty on success
};

struct LensRoot {
  double a_star = 0.0;
  double alpha_residual = 0.0;  ///< |u'(s_bar) - 1/2|
  double vp_residual = 0.0;     ///< |v'(s_bar) + sqrt(3)/2|
  int iterations = 0;
  std::vector<std::pair<double, double>> bracket_history;
  LensProfile profile;
};

struct ShootReport {
  std::vector<AngleRow> table;
  std::vector<LensRoot> roots;
  bool unique_in_bracket = true;  ///< one sign change across the sampled table
  double a_lo = 0.0, a_hi = 0.0, tol_a = 0.0;

  [[nodiscard]] const LensRoot& primary() const { return roots.front(); }
};

/**
 * Bisection on g(a) = u'(s_bar) - 1/2 over a validated bracket with
 * g(a_lo) > 0 > g(a_hi). Stops once a_hi - a_lo < tol_a.
 */
LensRoot find_lens(double a_lo, double a_hi, double tol_a, const PipelineConfig& cfg = {});

/// Rows sorted by a, computed on up to `jobs` threads; failures are recorded per row.
std::vector<AngleRow> sample_angle_table(std::vector<double> a_values, const PipelineConfig& cfg = {},
                                         unsigned jobs = 1);

/**
 * Samples `samples` heights across [a_lo, a_hi], refines every sign change of
 * g found in the table and reports whether the root is unique at that
 * resolution.
 */
ShootReport shoot(double a_lo, double a_hi, double tol_a, const PipelineConfig& cfg = {}, int samples = 8,
                  unsigned jobs = 1);

/// Columns a, s_bar, xi_a, alpha_deg, pass.
void write_angle_csv(std::ostream& os, const std::vector<AngleRow>& rows);

nlohmann::json angle_rows_to_json(const std::vector<AngleRow>& rows);
nlohmann::json shoot_report_to_json(const ShootReport& r);

}  // namespace lens
