#include "lens/shooting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <ostream>
#include <thread>

#include "lens/errors.hpp"
#include "lens/io.hpp"

namespace lens {

PipelineConfig PipelineConfig::tightened(double factor) const {
  PipelineConfig c = *this;
  c.series_tol /= factor;
  for (StepControl* s : {&c.graph.step, &c.arc.step}) {
    s->abs_tol /= factor;
    s->rel_tol /= factor;
  }
  c.arc.event_tol /= factor;
  c.arc.unit_tol /= factor;
  return c;
}

void PipelineConfig::set_ode_tolerances(double abs_tol, double rel_tol) {
  graph.step.abs_tol = arc.step.abs_tol = abs_tol;
  graph.step.rel_tol = arc.step.rel_tol = rel_tol;
}

namespace {

nlohmann::json step_to_json(const StepControl& s) {
  return {{"abs_tol", s.abs_tol},       {"rel_tol", s.rel_tol},   {"initial_step", s.initial_step},
          {"max_step", s.max_step},     {"min_step", s.min_step}, {"max_steps", s.max_steps}};
}

}  // namespace

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  return {{"order", cfg.order},
          {"series_tol", cfg.series_tol},
          {"max_iter", cfg.max_iter},
          {"r_cap", cfg.r_cap},
          {"x_seed", cfg.x_seed},
          {"graph",
           {{"x_stop", cfg.graph.x_stop},
            {"slope_cap", cfg.graph.slope_cap},
            {"height_floor", cfg.graph.height_floor},
            {"monitor_tol", cfg.graph.monitor_tol},
            {"step", step_to_json(cfg.graph.step)}}},
          {"arc",
           {{"event_tol", cfg.arc.event_tol},
            {"unit_tol", cfg.arc.unit_tol},
            {"monitor_tol", cfg.arc.monitor_tol},
            {"residual_tol", cfg.arc.residual_tol},
            {"unit_speed_tol", cfg.arc.unit_speed_tol},
            {"step", step_to_json(cfg.arc.step)}}}};
}

AngleResult angle_of(double a, const PipelineConfig& cfg) {
  if (!(a > 0.0 && a <= kSqrt2 * (1.0 + 1e-15))) throw ConfigError("angle_of: a must lie in (0, sqrt 2]");
  AngleResult out;
  out.series = picard_analytic(a, PicardOptions{cfg.order, cfg.series_tol, cfg.max_iter}, cfg.r_cap);
  const Series& h = out.series.h;

  // A few series points inside the seed interval so the profile starts next to the axis.
  std::vector<CurveState> prefix;
  for (double frac : {1e-3, 0.125, 0.25, 0.5, 0.75}) {
    const double x = frac * cfg.x_seed;
    prefix.push_back(to_curve_state(seed_from_series(h, a, x), series_segment_integrals(h, a, x)));
  }

  const ProfileSample seed = seed_from_series(h, a, cfg.x_seed);
  out.graph = integrate_graph(seed, a, cfg.graph, series_segment_integrals(h, a, cfg.x_seed));
  for (std::size_t i = 0; i < out.graph.samples.size(); ++i)
    prefix.push_back(to_curve_state(out.graph.samples[i], out.graph.integrals[i]));

  const CurveState start = handoff_to_arclength(out.graph.samples.back(), out.graph);
  out.profile = integrate_to_axis(start, a, cfg.arc, std::move(prefix));
  for (MonitorEntry m : out.graph.monitors) {
    m.id = "graph." + m.id;
    out.profile.monitors.push_back(std::move(m));
  }
  out.alpha = terminal_angle(out.profile);
  return out;
}

double lens_defect(const LensProfile& p) { return p.terminal().up - 0.5; }

LensRoot find_lens(double a_lo, double a_hi, double tol_a, const PipelineConfig& cfg) {
  if (!(a_lo > 0.0 && a_lo < a_hi)) throw ConfigError("find_lens: bracket must satisfy 0 < a_lo < a_hi");
  if (!(tol_a > 0.0)) throw ConfigError("find_lens: tol_a must be positive");

  LensProfile lo_profile = angle_of(a_lo, cfg).profile;
  LensProfile hi_profile = angle_of(a_hi, cfg).profile;
  double g_lo = lens_defect(lo_profile), g_hi = lens_defect(hi_profile);
  if (!(g_lo * g_hi < 0.0))
    throw BracketFailure("find_lens: u'(s_bar) - 1/2 has the same sign at a_lo=" + format17(a_lo) +
                         " and a_hi=" + format17(a_hi));

  LensRoot root;
  double lo = a_lo, hi = a_hi;
  root.bracket_history.emplace_back(lo, hi);
  while (hi - lo >= tol_a) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    LensProfile p = angle_of(mid, cfg).profile;
    const double g = lens_defect(p);
    if ((g > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g;
      lo_profile = std::move(p);
    } else {
      hi = mid;
      g_hi = g;
      hi_profile = std::move(p);
    }
    ++root.iterations;
    root.bracket_history.emplace_back(lo, hi);
  }

  const bool take_lo = std::abs(g_lo) <= std::abs(g_hi);
  root.a_star = take_lo ? lo : hi;
  root.profile = take_lo ? std::move(lo_profile) : std::move(hi_profile);
  root.alpha_residual = std::abs(lens_defect(root.profile));
  root.vp_residual = std::abs(root.profile.terminal().vp + std::sqrt(3.0) / 2.0);
  return root;
}

std::vector<AngleRow> sample_angle_table(std::vector<double> a_values, const PipelineConfig& cfg, unsigned jobs) {
  std::sort(a_values.begin(), a_values.end());
  std::vector<AngleRow> rows(a_values.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      AngleRow& row = rows[i];
      row.a = a_values[i];
      try {
        const AngleResult r = angle_of(row.a, cfg);
        row.s_bar = r.profile.s_bar;
        row.xi = r.profile.xi;
        row.alpha = r.alpha;
        row.monitor_pass = r.profile.monitors_pass();
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  jobs = std::clamp<unsigned>(jobs, 1u, static_cast<unsigned>(std::max<std::size_t>(rows.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

ShootReport shoot(double a_lo, double a_hi, double tol_a, const PipelineConfig& cfg, int samples, unsigned jobs) {
  if (!(a_lo > 0.0 && a_lo < a_hi)) throw ConfigError("shoot: bracket must satisfy 0 < a_lo < a_hi");
  if (samples < 2) throw ConfigError("shoot: need at least two samples");
  ShootReport rep;
  rep.a_lo = a_lo;
  rep.a_hi = a_hi;
  rep.tol_a = tol_a;

  std::vector<double> grid(samples);
  for (int i = 0; i < samples; ++i) grid[i] = a_lo + (a_hi - a_lo) * i / (samples - 1);
  grid.back() = a_hi;
  rep.table = sample_angle_table(grid, cfg, jobs);

  const AngleRow& first = rep.table.front();
  const AngleRow& last = rep.table.back();
  if (!first.error.empty() || !last.error.empty())
    throw BracketFailure("shoot: pipeline failed at a bracket endpoint: " + first.error + last.error);
  const auto g = [](const AngleRow& r) { return std::cos(r.alpha) - 0.5; };
  if (!(g(first) > 0.0 && g(last) < 0.0))
    throw BracketFailure("shoot: the bracket does not straddle the 120 degree junction angle");

  std::vector<std::pair<double, double>> brackets;
  const AngleRow* prev = &first;
  for (std::size_t i = 1; i < rep.table.size(); ++i) {
    const AngleRow& row = rep.table[i];
    if (!row.error.empty()) continue;
    if ((g(*prev) > 0.0) != (g(row) > 0.0)) brackets.emplace_back(prev->a, row.a);
    prev = &row;
  }
  rep.unique_in_bracket = brackets.size() == 1;
  for (const auto& [lo, hi] : brackets) rep.roots.push_back(find_lens(lo, hi, tol_a, cfg));
  return rep;
}

void write_angle_csv(std::ostream& os, const std::vector<AngleRow>& rows) {
  os << "a,s_bar,xi_a,alpha_deg,pass\n";
  for (const auto& r : rows) {
    const bool ok = r.error.empty() && r.monitor_pass;
    write_csv_row(os, {r.a, r.s_bar, r.xi, r.alpha * 180.0 / std::numbers::pi, ok ? 1.0 : 0.0});
  }
}

nlohmann::json angle_rows_to_json(const std::vector<AngleRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = {{"a", r.a},
                          {"s_bar", r.s_bar},
                          {"xi_a", r.xi},
                          {"alpha", r.alpha},
                          {"alpha_deg", r.alpha * 180.0 / std::numbers::pi},
                          {"monitor_pass", r.monitor_pass}};
    if (!r.error.empty()) row["error"] = r.error;
    j.push_back(std::move(row));
  }
  return j;
}

nlohmann::json shoot_report_to_json(const ShootReport& r) {
  nlohmann::json roots = nlohmann::json::array();
  for (const auto& root : r.roots) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [lo, hi] : root.bracket_history) hist.push_back({lo, hi});
    roots.push_back({{"a_star", root.a_star},
                     {"alpha_residual", root.alpha_residual},
                     {"vp_residual", root.vp_residual},
                     {"iterations", root.iterations},
                     {"bracket_history", hist},
                     {"profile", profile_summary_json(root.profile)}});
  }
  nlohmann::json j = {{"bracket", {r.a_lo, r.a_hi}},
                      {"tol_a", r.tol_a},
                      {"table", angle_rows_to_json(r.table)},
                      {"roots", roots},
                      {"unique_in_bracket", r.unique_in_bracket}};
  if (!r.roots.empty()) {
    j["a_star"] = r.primary().a_star;
    j["alpha_residual"] = r.primary().alpha_residual;
    j["vp_residual"] = r.primary().vp_residual;
  }
  return j;
}

}  // namespace lens
