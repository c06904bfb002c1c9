#include "lens/arclength_curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lens/errors.hpp"
#include "lens/io.hpp"

namespace lens {

PolarConstants polar_constants(double a) {
  using std::numbers::pi;
  PolarConstants p;
  p.K = pi * std::sqrt(std::numbers::e) / 8.0 * a * std::exp(-0.5 * a * a);
  p.C = std::sqrt(1.0 - p.K * p.K) / p.K;
  p.rho_min = std::exp(-p.C * pi / 2.0);
  p.rho_max = std::exp(p.C * pi / 2.0);
  p.c = p.K * p.rho_min;
  p.s_max = p.c > 0.0 ? pi / (2.0 * p.c) : std::numeric_limits<double>::infinity();
  return p;
}

const MonitorEntry& LensProfile::monitor(const std::string& id) const {
  for (const auto& m : monitors)
    if (m.id == id) return m;
  throw std::out_of_range("LensProfile: no monitor " + id);
}

bool LensProfile::monitors_pass() const {
  return std::all_of(monitors.begin(), monitors.end(), [](const MonitorEntry& m) { return m.pass(); });
}

CurveState to_curve_state(const ProfileSample& p, const CurveIntegrals& q) {
  const double w = 1.0 + p.fp * p.fp, sq = std::sqrt(w);
  CurveState st;
  st.s = q.s;
  st.u = p.x;
  st.v = p.f;
  st.up = 1.0 / sq;
  st.vp = p.fp / sq;
  st.I_phi = q.I_phi;
  st.I_v = q.I_v;
  st.k = p.fpp / (w * sq);
  return st;
}

CurveState handoff_to_arclength(const ProfileSample& p, const ProfileTrajectory& prefix) {
  if (prefix.samples.empty() || prefix.samples.size() != prefix.integrals.size())
    throw InconsistentPrefix("handoff_to_arclength: empty or malformed prefix");
  const ProfileSample& last = prefix.samples.back();
  if (last.x != p.x || last.f != p.f || last.fp != p.fp)
    throw InconsistentPrefix("handoff_to_arclength: sample is not the end of the prefix");
  for (std::size_t i = 1; i < prefix.samples.size(); ++i)
    if (!(prefix.samples[i].x > prefix.samples[i - 1].x))
      throw InconsistentPrefix("handoff_to_arclength: prefix abscissae not increasing");
  return to_curve_state(p, prefix.integrals.back());
}

std::pair<double, double> arclength_acceleration(double u, double v, double up, double vp) {
  const double m = u - 1.0 / u;
  return {-vp * vp * m + up * vp * v, vp * up * m - up * up * v};
}

namespace {

using State = Vec<6>;

State arc_rhs(double, const State& y) {
  const double u = y(0), v = y(1), up = y(2), vp = y(3);
  const auto [upp, vpp] = arclength_acceleration(u, v, up, vp);
  const double g = std::exp(-0.5 * (u * u + v * v));
  State d;
  d << up, vp, upp, vpp, g * up * vp / u, g * v;
  return d;
}

CurveState to_state(double s, const State& y) {
  CurveState st;
  st.s = s;
  st.u = y(0);
  st.v = y(1);
  st.up = y(2);
  st.vp = y(3);
  st.I_phi = y(4);
  st.I_v = y(5);
  const auto [upp, vpp] = arclength_acceleration(st.u, st.v, st.up, st.vp);
  st.k = -st.vp * upp + st.up * vpp;
  return st;
}

/**
 * Arclength sigma in (0, h] at which component `idx` of the step from (t0, y0)
 * equals `target`. Dense output gives the first guess; the root is then
 * polished on single exact steps by safeguarded secant.
 */
double locate_event(const RkStep<6>& step, int idx, double target, double tol) {
  const auto& dense = step.dense;
  const double t0 = dense.t0, h = dense.h;
  const State y0 = dense.r1;
  const State f0 = arc_rhs(t0, y0);
  const auto on_dense = [&](double sigma) { return dense(t0 + sigma)(idx) - target; };
  const auto on_step = [&](double sigma) { return dopri5_step<6>(arc_rhs, t0, y0, f0, sigma).y(idx) - target; };

  const auto solve = [&](auto&& fn, double lo, double flo, double hi, double fhi, double stop) {
    // Illinois-modified regula falsi with a bisection fallback.
    int side = 0;
    double mid = hi;
    for (int it = 0; it < 100 && hi - lo > stop; ++it) {
      mid = (lo * fhi - hi * flo) / (fhi - flo);
      if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
      const double fm = fn(mid);
      if (fm == 0.0) return mid;
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = mid;
        fhi = fm;
        if (side == 1) flo *= 0.5;
        side = 1;
      }
    }
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
  };

  const double f_start = y0(idx) - target;
  const double f_end = step.y(idx) - target;
  const double guess = solve(on_dense, 0.0, f_start, h, f_end, 1e-3 * tol);

  // Bracket the polished root tightly around the dense guess.
  double lo = 0.0, hi = h, flo = f_start, fhi = f_end;
  const double width = std::max(1e-6 * h, 10.0 * tol);
  const double a = std::max(0.0, guess - width), b = std::min(h, guess + width);
  const double fa = a > 0.0 ? on_step(a) : f_start;
  const double fb = b < h ? on_step(b) : f_end;
  if ((fa > 0.0) != (fb > 0.0) || fb == 0.0) {
    lo = a;
    flo = fa;
    hi = b;
    fhi = fb;
  }
  return solve(on_step, lo, flo, hi, fhi, 1e-3 * tol);
}

std::string violation_message(double a, const std::vector<MonitorEntry>& monitors) {
  std::ostringstream msg;
  msg << "profile monitors failed for a=" << format17(a) << ':';
  for (const auto& m : monitors)
    if (!m.pass()) msg << ' ' << m.id << " (worst slack " << m.worst_slack << " at s=" << m.at << ')';
  return msg.str();
}

}  // namespace

LensProfile integrate_to_axis(const CurveState& start, double a, const ArcOptions& opt, std::vector<CurveState> prefix) {
  if (!(a > 0.0)) throw std::invalid_argument("integrate_to_axis: a must be positive");
  if (!(start.u > 0.0 && start.v > 0.0)) throw std::invalid_argument("integrate_to_axis: start must lie in u > 0, v > 0");

  LensProfile out;
  out.a = a;
  out.states = std::move(prefix);
  if (out.states.empty() || out.states.back().s != start.s) out.states.push_back(start);

  bool have_s_star = false;
  for (std::size_t i = 0; i < out.states.size() && !have_s_star; ++i) {
    if (out.states[i].u == 1.0) {
      out.s_star = out.states[i].s;
      have_s_star = true;
    } else if (i > 0 && out.states[i - 1].u < 1.0 && out.states[i].u > 1.0) {
      const auto& p = out.states[i - 1];
      const auto& q = out.states[i];
      out.s_star = p.s + (1.0 - p.u) / (q.u - p.u) * (q.s - p.s);
      have_s_star = true;
    }
  }

  const PolarConstants pc = polar_constants(a);
  State y;
  y << start.u, start.v, start.up, start.vp, start.I_phi, start.I_v;

  bool crossed = false;
  const auto observer = [&](const RkStep<6>& step, double s, State& state) {
    if (!have_s_star && step.dense.r1(0) < 1.0 && state(0) >= 1.0) {
      out.s_star = step.dense.t0 + locate_event(step, 0, 1.0, opt.event_tol);
      have_s_star = true;
    }
    if (state(1) <= 0.0) {
      const double sigma = locate_event(step, 1, 0.0, opt.event_tol);
      s = step.dense.t0 + sigma;
      state = dopri5_step<6>(arc_rhs, step.dense.t0, step.dense.r1, arc_rhs(step.dense.t0, step.dense.r1), sigma).y;
      crossed = true;
    }
    const double drift = std::abs(state(2) * state(2) + state(3) * state(3) - 1.0);
    out.max_unit_drift_raw = std::max(out.max_unit_drift_raw, drift);
    if (drift > opt.unit_tol) {
      state.segment<2>(2).normalize();
      ++out.projections;
    }
    if (!(state(0) > 0.0)) throw NoCrossing("integrate_to_axis: curve reached the rotation axis");
    out.states.push_back(to_state(s, state));
    return crossed ? StepAction::Stop : StepAction::Continue;
  };

  double h = opt.step.initial_step;
  const double s_limit = std::isfinite(pc.s_max) ? pc.s_max : std::numeric_limits<double>::max();
  integrate_adaptive<6>(arc_rhs, start.s, y, s_limit, opt.step, h, observer);
  if (!crossed) throw NoCrossing("integrate_to_axis: no crossing of v = 0 before the guaranteed length");

  const CurveState& end = out.states.back();
  out.s_bar = end.s;
  out.xi = end.u;
  out.alpha = std::atan2(end.vp, end.up);
  out.monitors = profile_monitors(out, opt);
  if (opt.throw_on_violation && !out.monitors_pass()) throw MonitorViolation(violation_message(a, out.monitors));
  return out;
}

Curvatures curvature_three_ways(const CurveState& st) {
  if (!(st.u > 0.0)) throw std::invalid_argument("curvature_three_ways: u must be positive");
  const double grow = std::exp(0.5 * (st.u * st.u + st.v * st.v));
  Curvatures k;
  k.k_alg = -st.vp / st.u + st.u * st.vp - st.v * st.up;
  k.k_var = st.I_phi * grow / st.u;
  k.k_int = -st.vp / st.u - grow * st.I_v / st.u;
  return k;
}

double shrinker_residual(const CurveState& st) { return st.k + st.vp / st.u - st.u * st.vp + st.v * st.up; }

std::vector<MonitorEntry> polar_monitors(const LensProfile& profile, double a, double tol) {
  const PolarConstants pc = polar_constants(a);
  std::vector<MonitorEntry> m(7);
  m[0].id = "transversality_global";
  m[1].id = "transversality_graph";
  m[2].id = "radial_speed";
  m[3].id = "annulus_inner";
  m[4].id = "annulus_outer";
  m[5].id = "winding_rate";
  m[6].id = "theta_decreasing";
  const double graph_bound = a / (1.0 + a * a);
  for (std::size_t i = 0; i < profile.states.size(); ++i) {
    const CurveState& st = profile.states[i];
    const double nt = st.normal_transversality();
    const double rp = st.rho_prime();
    m[0].observe(nt - pc.K, st.s, tol);
    if (st.s <= profile.s_star) m[1].observe(nt - graph_bound, st.s, tol);
    m[2].observe(1.0 - pc.K * pc.K - rp * rp, st.s, tol);
    m[3].observe(st.rho() - pc.rho_min, st.s, tol);
    m[4].observe(pc.rho_max - st.rho(), st.s, tol);
    m[5].observe(-st.theta_prime() - pc.c, st.s, tol);
    if (i > 0) m[6].observe(profile.states[i - 1].theta() - st.theta(), st.s, tol);
  }
  return m;
}

std::vector<MonitorEntry> profile_monitors(const LensProfile& profile, const ArcOptions& opt) {
  std::vector<MonitorEntry> m = polar_monitors(profile, profile.a, opt.monitor_tol);
  MonitorEntry unit{"unit_speed"}, residual{"shrinker_residual"}, k_int{"curvature_integral"},
      k_var{"curvature_variation"}, u_pos{"u_positive"}, v_pos{"v_positive"};
  for (std::size_t i = 0; i < profile.states.size(); ++i) {
    const CurveState& st = profile.states[i];
    const Curvatures k = curvature_three_ways(st);
    unit.observe(opt.unit_speed_tol - std::abs(st.up * st.up + st.vp * st.vp - 1.0), st.s, 0.0);
    residual.observe(opt.residual_tol - std::abs(shrinker_residual(st)), st.s, 0.0);
    k_int.observe(opt.residual_tol - std::abs(k.k_alg - k.k_int), st.s, 0.0);
    k_var.observe(opt.residual_tol - std::abs(k.k_alg - k.k_var), st.s, 0.0);
    u_pos.observe(st.u, st.s, 0.0);
    if (i + 1 < profile.states.size()) v_pos.observe(st.v, st.s, 0.0);
  }
  for (auto* e : {&unit, &residual, &k_int, &k_var, &u_pos, &v_pos}) m.push_back(*e);
  return m;
}

double terminal_angle(const LensProfile& profile) {
  if (profile.states.empty()) throw std::invalid_argument("terminal_angle: empty profile");
  const CurveState& end = profile.terminal();
  return std::atan2(end.vp, end.up);
}

void write_profile_csv(std::ostream& os, const LensProfile& profile) {
  os << "s,u,v,up,vp,k_alg,k_int,rho,theta,residual_shrinker\n";
  for (const auto& st : profile.states) {
    const Curvatures k = curvature_three_ways(st);
    write_csv_row(os, {st.s, st.u, st.v, st.up, st.vp, k.k_alg, k.k_int, st.rho(), st.theta(), shrinker_residual(st)});
  }
}

nlohmann::json monitors_to_json(const std::vector<MonitorEntry>& monitors) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& m : monitors) {
    j[m.id] = {{"worst_slack", m.worst_slack}, {"at", m.at}, {"evaluated", m.evaluated},
               {"violations", m.violations}, {"pass", m.pass()}};
  }
  return j;
}

nlohmann::json profile_summary_json(const LensProfile& profile) {
  const PolarConstants pc = polar_constants(profile.a);
  const CurveState& end = profile.terminal();
  return {{"a", profile.a},
          {"s_bar", profile.s_bar},
          {"s_star", profile.s_star},
          {"xi_a", profile.xi},
          {"alpha", profile.alpha},
          {"alpha_deg", profile.alpha * 180.0 / std::numbers::pi},
          {"up_end", end.up},
          {"vp_end", end.vp},
          {"v_end", end.v},
          {"samples", profile.states.size()},
          {"max_unit_drift_raw", profile.max_unit_drift_raw},
          {"projections", profile.projections},
          {"constants", {{"K_a", pc.K}, {"C_a", pc.C}, {"c_a", pc.c}, {"s_max", pc.s_max}}},
          {"monitors_pass", profile.monitors_pass()},
          {"monitors", monitors_to_json(profile.monitors)}};
}

}  // namespace lens
