#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lens/ode.hpp"
#include "lens/series_core.hpp"
#include "lens/types.hpp"

namespace lens {

/// Worst slack of one monitored inequality over a trajectory (negative = violated).
struct MonitorEntry {
  std::string id;
  double worst_slack = 0.0;
  double at = 0.0;  ///< abscissa (or arclength) of the worst sample
  long evaluated = 0;
  long violations = 0;

  void observe(double slack, double where, double tol);
  [[nodiscard]] bool pass() const { return violations == 0; }
};

struct GraphOptions {
  double x_stop = 1.25;     ///< hard upper limit of the graph stage
  double slope_cap = 50.0;  ///< hand off once |f'| exceeds this
  /// Past x = 1, also hand off once f drops below this fraction of f(1).
  double height_floor = 0.5;
  double monitor_tol = 1e-9;
  bool throw_on_violation = true;
  StepControl step{};
};

struct ProfileTrajectory {
  double a = 0.0;
  std::vector<ProfileSample> samples;
  std::vector<CurveIntegrals> integrals;  ///< parallel to samples
  double x_end = 0.0;
  std::vector<MonitorEntry> monitors;

  [[nodiscard]] const MonitorEntry& monitor(const std::string& id) const;
  [[nodiscard]] bool monitors_pass() const;
  /// Index of the sample with x == 1, if the stage reached it.
  [[nodiscard]] std::size_t index_at_one() const;
};

/// Right-hand side of the graph equation f'' = (1 + f'^2) [f'(x - 1/x) - f].
double graph_rhs(double x, double f, double fp);

/// (x, a + h, h', h'') by direct series evaluation; requires 0 < x_seed < radius of h.
ProfileSample seed_from_series(const Series& h, double a, double x_seed);

/// s, I_phi, I_v accumulated over [0, x_seed] from the series, by Gauss-Legendre.
CurveIntegrals series_segment_integrals(const Series& h, double a, double x_seed);

/**
 * Integrates the graph equation from the seed through x = 1 (landing exactly on
 * it) and past it, until x_stop, the slope cap or the height floor. Every
 * inequality proved for the graph region is checked at every accepted step.
 */
ProfileTrajectory integrate_graph(const ProfileSample& seed, double a, const GraphOptions& opt,
                                  const CurveIntegrals& seed_integrals = {});

/// min over samples in [0, 1] of (f - x f')/sqrt(1 + f'^2) - a/sqrt(1 + a^2).
double transversality_monitor(const ProfileTrajectory& t, double a);

/// Columns x, f, fp, fpp, F, slack_lower, slack_upper, slack_transversality.
void write_graph_csv(std::ostream& os, const ProfileTrajectory& t);

}  // namespace lens
