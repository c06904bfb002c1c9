#pragma once

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <vector>

#include "lens/graph_profile.hpp"
#include "lens/ode.hpp"
#include "lens/types.hpp"

namespace lens {

struct ArcOptions {
  StepControl step{};
  double event_tol = 1e-12;  ///< arclength resolution of v = 0 and u = 1 events
  double unit_tol = 1e-12;   ///< project the tangent once |u'^2 + v'^2 - 1| exceeds this
  double monitor_tol = 1e-9;
  double residual_tol = 1e-8;   ///< shrinker residual and curvature identities
  double unit_speed_tol = 1e-10;
  bool throw_on_violation = true;
};

/// Explicit constants controlling transversality and winding of the profile.
struct PolarConstants {
  double K = 0.0;        ///< (pi sqrt(e) / 8) a e^{-a^2/2}
  double C = 0.0;        ///< sqrt(1 - K^2) / K
  double c = 0.0;        ///< K e^{-C pi / 2}
  double rho_min = 0.0;  ///< e^{-C pi / 2}
  double rho_max = 0.0;  ///< e^{C pi / 2}
  double s_max = 0.0;    ///< pi / (2c); infinite when c underflows
};

PolarConstants polar_constants(double a);

/// Profile from the axis to the horizontal axis.
struct LensProfile {
  double a = 0.0;
  std::vector<CurveState> states;
  double s_bar = 0.0;
  double s_star = 0.0;  ///< first s with u = 1
  double xi = 0.0;      ///< u(s_bar)
  double alpha = 0.0;   ///< terminal tangent angle, tangent = (cos alpha, sin alpha)
  double max_unit_drift_raw = 0.0;
  long projections = 0;
  std::vector<MonitorEntry> monitors;

  [[nodiscard]] const CurveState& terminal() const { return states.back(); }
  [[nodiscard]] const MonitorEntry& monitor(const std::string& id) const;
  [[nodiscard]] bool monitors_pass() const;
};

/// Graph sample mapped to arclength variables: u = x, v = f, (u', v') = (1, f') / sqrt(1 + f'^2).
CurveState to_curve_state(const ProfileSample& p, const CurveIntegrals& q);

/// State at the last graph sample with s and the two integrals carried over the prefix.
CurveState handoff_to_arclength(const ProfileSample& p, const ProfileTrajectory& prefix);

/// (u'', v'') of the profile system at a state.
std::pair<double, double> arclength_acceleration(double u, double v, double up, double vp);

/**
 * Integrates the profile system with both integrals appended to the state
 * until v = 0, located by dense-output root finding and then polished with a
 * single exact step. `prefix` (graph-region states) is prepended to the
 * returned profile and used to find s_*. Monitors are evaluated on the
 * complete profile.
 */
LensProfile integrate_to_axis(const CurveState& start, double a, const ArcOptions& opt,
                              std::vector<CurveState> prefix = {});

struct Curvatures {
  double k_alg = 0.0;  ///< -v'/u + u v' - v u'
  double k_var = 0.0;  ///< I_phi e^{rho^2/2} / u
  double k_int = 0.0;  ///< -v'/u - e^{rho^2/2} I_v / u
};

Curvatures curvature_three_ways(const CurveState& st);

/// k + v'/u - u v' + v u' with k as stored on the state.
double shrinker_residual(const CurveState& st);

/// Polar-coordinate inequalities on their certified ranges.
std::vector<MonitorEntry> polar_monitors(const LensProfile& profile, double a, double tol = 1e-9);

/// Polar monitors plus unit speed, shrinker residual, curvature identities and sign conditions.
std::vector<MonitorEntry> profile_monitors(const LensProfile& profile, const ArcOptions& opt);

/// atan2(v'(s_bar), u'(s_bar)).
double terminal_angle(const LensProfile& profile);

/// Columns s, u, v, up, vp, k_alg, k_int, rho, theta, residual_shrinker.
void write_profile_csv(std::ostream& os, const LensProfile& profile);

nlohmann::json monitors_to_json(const std::vector<MonitorEntry>& monitors);
nlohmann::json profile_summary_json(const LensProfile& profile);

}  // namespace lens
