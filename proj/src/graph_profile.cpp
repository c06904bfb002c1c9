#include "lens/graph_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lens/errors.hpp"
#include "lens/io.hpp"
#include "lens/quadrature.hpp"

namespace lens {

void MonitorEntry::observe(double slack, double where, double tol) {
  if (evaluated == 0 || slack < worst_slack) {
    worst_slack = slack;
    at = where;
  }
  ++evaluated;
  if (!(slack >= -tol)) ++violations;
}

const MonitorEntry& ProfileTrajectory::monitor(const std::string& id) const {
  for (const auto& m : monitors)
    if (m.id == id) return m;
  throw std::out_of_range("ProfileTrajectory: no monitor " + id);
}

bool ProfileTrajectory::monitors_pass() const {
  return std::all_of(monitors.begin(), monitors.end(), [](const MonitorEntry& m) { return m.pass(); });
}

std::size_t ProfileTrajectory::index_at_one() const {
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].x == 1.0) return i;
  throw std::out_of_range("ProfileTrajectory: graph stage did not reach x = 1");
}

double graph_rhs(double x, double f, double fp) { return (1.0 + fp * fp) * (fp * (x - 1.0 / x) - f); }

ProfileSample seed_from_series(const Series& h, double a, double x_seed) {
  if (!(x_seed > 0.0)) throw std::invalid_argument("seed_from_series: x_seed must be positive");
  if (!(x_seed < h.radius())) throw std::invalid_argument("seed_from_series: x_seed outside the certified radius");
  return {x_seed, a + h(x_seed), h.derivative(x_seed), h.second_derivative(x_seed)};
}

CurveIntegrals series_segment_integrals(const Series& h, double a, double x_seed) {
  const Series p = derivative_over_x(h);
  const auto with = [&](auto&& integrand) { return integrate_gauss(integrand, 0.0, x_seed, 20); };
  CurveIntegrals out;
  out.s = with([&](double x) {
    const double fp = x * p(x);
    return std::sqrt(1.0 + fp * fp);
  });
  out.I_phi = with([&](double x) {
    const double f = a + h(x), px = p(x), fp = x * px;
    return std::exp(-0.5 * (x * x + f * f)) * px / std::sqrt(1.0 + fp * fp);
  });
  out.I_v = with([&](double x) {
    const double f = a + h(x), fp = x * p(x);
    return std::exp(-0.5 * (x * x + f * f)) * f * std::sqrt(1.0 + fp * fp);
  });
  return out;
}

namespace {

enum Monitor { kHeightLower, kHeightUpper, kSlopeLower, kSlopeUpper, kConcavity, kPositivity, kLyapunov, kTransversality };

std::vector<MonitorEntry> make_graph_monitors() {
  std::vector<MonitorEntry> m(8);
  m[kHeightLower].id = "height_lower";
  m[kHeightUpper].id = "height_upper";
  m[kSlopeLower].id = "slope_lower";
  m[kSlopeUpper].id = "slope_upper";
  m[kConcavity].id = "concavity";
  m[kPositivity].id = "positivity";
  m[kLyapunov].id = "lyapunov_increasing";
  m[kTransversality].id = "transversality";
  return m;
}

double transversality_slack(const ProfileSample& p, double a) {
  return (p.f - p.x * p.fp) / std::sqrt(1.0 + p.fp * p.fp) - a / std::sqrt(1.0 + a * a);
}

double lyapunov(const ProfileSample& p) { return p.f / std::sqrt(1.0 - p.x * p.x); }

}  // namespace

ProfileTrajectory integrate_graph(const ProfileSample& seed, double a, const GraphOptions& opt,
                                  const CurveIntegrals& seed_integrals) {
  if (!(a > 0.0)) throw std::invalid_argument("integrate_graph: a must be positive");
  if (!(seed.x > 0.0 && seed.x < 1.0)) throw std::invalid_argument("integrate_graph: seed must lie in (0, 1)");
  if (!(opt.x_stop >= 1.0)) throw std::invalid_argument("integrate_graph: x_stop must be >= 1");

  ProfileTrajectory out;
  out.a = a;
  out.monitors = make_graph_monitors();
  const double tol = opt.monitor_tol;
  auto& mon = out.monitors;

  const auto record = [&](const ProfileSample& p, const CurveIntegrals& q) {
    if (p.x < 1.0) {
      mon[kHeightLower].observe(p.f - a * std::sqrt(1.0 - p.x * p.x), p.x, tol);
      mon[kHeightUpper].observe(a - p.f, p.x, tol);
      mon[kSlopeLower].observe(p.fp + a * p.x / (1.0 - p.x * p.x), p.x, tol);
      if (!out.samples.empty()) mon[kLyapunov].observe(lyapunov(p) - lyapunov(out.samples.back()), p.x, tol);
    }
    if (p.x <= 1.0) mon[kTransversality].observe(transversality_slack(p, a), p.x, tol);
    mon[kSlopeUpper].observe(-p.fp, p.x, tol);
    mon[kConcavity].observe(-p.fpp, p.x, tol);
    mon[kPositivity].observe(p.f, p.x, tol);
    out.samples.push_back(p);
    out.integrals.push_back(q);
  };

  const auto rhs = [](double x, const Vec<5>& y) {
    const double f = y(0), fp = y(1);
    const double w = 1.0 + fp * fp, sq = std::sqrt(w);
    const double g = std::exp(-0.5 * (x * x + f * f));
    Vec<5> d;
    d << fp, w * (fp * (x - 1.0 / x) - f), sq, g * fp / (x * sq), g * f * sq;
    return d;
  };

  record(seed, seed_integrals);
  Vec<5> y;
  y << seed.f, seed.fp, seed_integrals.s, seed_integrals.I_phi, seed_integrals.I_v;

  double f_at_one = std::numeric_limits<double>::quiet_NaN();
  bool stop = false;
  const auto observer = [&](const RkStep<5>&, double x, Vec<5>& state) {
    const ProfileSample p{x, state(0), state(1), graph_rhs(x, state(0), state(1))};
    record(p, {state(2), state(3), state(4)});
    if (x == 1.0) f_at_one = p.f;
    if (std::abs(p.fp) > opt.slope_cap) stop = true;
    if (x > 1.0 && p.f < opt.height_floor * f_at_one) stop = true;
    return stop ? StepAction::Stop : StepAction::Continue;
  };

  double h = opt.step.initial_step;
  integrate_adaptive<5>(rhs, seed.x, y, 1.0, opt.step, h, observer);
  if (!stop && opt.x_stop > 1.0) integrate_adaptive<5>(rhs, 1.0, y, opt.x_stop, opt.step, h, observer);
  out.x_end = out.samples.back().x;

  if (opt.throw_on_violation && !out.monitors_pass()) {
    std::ostringstream msg;
    msg << "integrate_graph: a=" << format17(a) << " violated";
    for (const auto& m : out.monitors)
      if (!m.pass()) msg << ' ' << m.id << " (worst slack " << m.worst_slack << " at x=" << m.at << ')';
    throw MonitorViolation(msg.str());
  }
  return out;
}

double transversality_monitor(const ProfileTrajectory& t, double a) {
  if (t.samples.empty() || t.samples.back().x < 1.0)
    throw std::invalid_argument("transversality_monitor: trajectory must cover [x_seed, 1]");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& p : t.samples)
    if (p.x <= 1.0) worst = std::min(worst, transversality_slack(p, a));
  return worst;
}

void write_graph_csv(std::ostream& os, const ProfileTrajectory& t) {
  os << "x,f,fp,fpp,F,slack_lower,slack_upper,slack_transversality\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : t.samples) {
    const bool inside = p.x < 1.0;
    write_csv_row(os, {p.x, p.f, p.fp, p.fpp, inside ? lyapunov(p) : nan,
                       inside ? p.f - t.a * std::sqrt(1.0 - p.x * p.x) : nan, t.a - p.f,
                       p.x <= 1.0 ? transversality_slack(p, t.a) : nan});
  }
}

}  // namespace lens
