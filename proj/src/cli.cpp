#include "lens/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lens/cluster_export.hpp"
#include "lens/errors.hpp"
#include "lens/io.hpp"
#include "lens/shooting.hpp"
#include "lens/verification.hpp"

namespace lens::cli {

namespace fs = std::filesystem;

double parse_height(const std::string& text) {
  if (text == "sqrt2" || text == "sqrt(2)") return kSqrt2;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: " + text);
  }
  if (used != text.size()) throw ConfigError("not a number: " + text);
  return v;
}

void RunConfig::validate() const {
  const auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(series_tol, "--series-tol");
  positive(ode_abs, "--ode-abs");
  positive(ode_rel, "--ode-rel");
  positive(event_tol, "--event-tol");
  positive(tol_a, "--tol-a");
  positive(x_seed, "--x-seed");
  if (order < 4 || order % 2 != 0) throw ConfigError("--order must be even and at least 4");
  if (!(a_lo > 0.0 && a_lo < a_hi && a_hi <= kSqrt2)) throw ConfigError("bracket must satisfy 0 < a_lo < a_hi <= sqrt2");
  if (a && !(*a > 0.0 && *a <= kSqrt2)) throw ConfigError("--a must lie in (0, sqrt2]");
  if (command == "table") {
    positive(step, "--step");
    if (!(from > 0.0 && from <= to && to <= kSqrt2)) throw ConfigError("table range must satisfy 0 < from <= to <= sqrt2");
  }
  if (jobs < 1) throw ConfigError("--jobs must be at least 1");
  if (samples < 2) throw ConfigError("--samples must be at least 2");
  if (n_theta < 16) throw ConfigError("--n-theta must be at least 16");
  if (n_s < 4) throw ConfigError("--n-s must be at least 4");
  if (annulus_outer < 0.0) throw ConfigError("--annulus-outer must be non-negative");
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j = {{"command", c.command},
                      {"a_lo", c.a_lo},
                      {"a_hi", c.a_hi},
                      {"series_tol", c.series_tol},
                      {"ode_abs", c.ode_abs},
                      {"ode_rel", c.ode_rel},
                      {"event_tol", c.event_tol},
                      {"tol_a", c.tol_a},
                      {"order", c.order},
                      {"x_seed", c.x_seed},
                      {"output_dir", c.output_dir},
                      {"from", c.from},
                      {"to", c.to},
                      {"step", c.step},
                      {"jobs", c.jobs},
                      {"samples", c.samples},
                      {"n_theta", c.n_theta},
                      {"n_s", c.n_s},
                      {"annulus_outer", c.annulus_outer}};
  j["a"] = c.a ? nlohmann::json(*c.a) : nlohmann::json(nullptr);
  return j;
}

namespace {

PipelineConfig pipeline_of(const RunConfig& c) {
  PipelineConfig p;
  p.order = c.order;
  p.series_tol = c.series_tol;
  p.x_seed = c.x_seed;
  p.set_ode_tolerances(c.ode_abs, c.ode_rel);
  p.arc.event_tol = c.event_tol;
  return p;
}

fs::path output_dir(const RunConfig& c) { return c.output_dir; }

nlohmann::json envelope(const RunConfig& c) {
  return {{"config", config_json(c)}, {"pipeline", config_to_json(pipeline_of(c))}};
}

std::string to_csv(auto&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

std::string deg(double rad) { return format17(rad * 180.0 / std::numbers::pi); }

int cmd_solve(const RunConfig& c, std::ostream& out) {
  if (!c.a) throw ConfigError("solve needs --a");
  const AngleResult r = angle_of(*c.a, pipeline_of(c));
  const fs::path dir = output_dir(c);
  write_text_file(dir / "profile.csv", to_csv([&](std::ostream& os) { write_profile_csv(os, r.profile); }));
  write_text_file(dir / "graph.csv", to_csv([&](std::ostream& os) { write_graph_csv(os, r.graph); }));
  nlohmann::json j = envelope(c);
  j["profile"] = profile_summary_json(r.profile);
  j["series"] = series_to_json(r.series.h, *c.a);
  j["series_certificate"] = certificate_to_json(contraction_certificate(r.series.constants));
  j["series_iterations"] = r.series.iterations;
  write_json_file(dir / "profile.json", j);
  if (c.json) {
    out << j.dump(2) << '\n';
  } else {
    out << "a        " << format17(*c.a) << '\n'
        << "s_bar    " << format17(r.profile.s_bar) << '\n'
        << "s_star   " << format17(r.profile.s_star) << '\n'
        << "xi_a     " << format17(r.profile.xi) << '\n'
        << "alpha    " << deg(r.alpha) << " deg\n"
        << "monitors " << (r.profile.monitors_pass() ? "pass" : "FAIL") << '\n'
        << "wrote    " << (dir / "profile.csv").string() << ", " << (dir / "profile.json").string() << '\n';
  }
  return r.profile.monitors_pass() ? kOk : kMonitorViolation;
}

int cmd_shoot(const RunConfig& c, std::ostream& out) {
  const ShootReport rep = shoot(c.a_lo, c.a_hi, c.tol_a, pipeline_of(c), c.samples, c.jobs);
  const fs::path dir = output_dir(c);
  nlohmann::json j = envelope(c);
  j["report"] = shoot_report_to_json(rep);
  write_json_file(dir / "shoot.json", j);
  write_text_file(dir / "lens_profile.csv", to_csv([&](std::ostream& os) { write_profile_csv(os, rep.primary().profile); }));
  if (c.json) {
    out << j.dump(2) << '\n';
  } else {
    for (const auto& root : rep.roots)
      out << "a*             " << format17(root.a_star) << "  (|u'-1/2| = " << format17(root.alpha_residual)
          << ", " << root.iterations << " bisection steps)\n";
    out << "unique         " << (rep.unique_in_bracket ? "yes" : "no") << " at " << rep.table.size()
        << " sampled heights\n"
        << "xi_a*          " << format17(rep.primary().profile.xi) << '\n'
        << "s_bar          " << format17(rep.primary().profile.s_bar) << '\n'
        << "wrote          " << (dir / "shoot.json").string() << '\n';
  }
  const bool ok = std::all_of(rep.roots.begin(), rep.roots.end(), [](const LensRoot& r) { return r.profile.monitors_pass(); });
  return ok ? kOk : kMonitorViolation;
}

int cmd_table(const RunConfig& c, std::ostream& out) {
  std::vector<double> values;
  const long n = static_cast<long>(std::floor((c.to - c.from) / c.step + 1e-9)) + 1;
  for (long i = 0; i < n; ++i) values.push_back(std::min(c.from + c.step * static_cast<double>(i), kSqrt2));
  const std::vector<AngleRow> rows = sample_angle_table(values, pipeline_of(c), c.jobs);
  const fs::path dir = output_dir(c);
  write_text_file(dir / "angle_table.csv", to_csv([&](std::ostream& os) { write_angle_csv(os, rows); }));
  nlohmann::json j = envelope(c);
  j["table"] = angle_rows_to_json(rows);
  write_json_file(dir / "angle_table.json", j);
  long failed = 0;
  for (const auto& r : rows) failed += (!r.error.empty() || !r.monitor_pass) ? 1 : 0;
  if (c.json) {
    out << j.dump(2) << '\n';
  } else {
    for (const auto& r : rows) {
      out << format17(r.a) << "  alpha " << deg(r.alpha) << " deg  xi " << format17(r.xi);
      if (!r.error.empty()) out << "  error: " << r.error;
      out << '\n';
    }
    out << rows.size() << " rows, " << failed << " failed; wrote " << (dir / "angle_table.csv").string() << '\n';
  }
  return failed == 0 ? kOk : kMonitorViolation;
}

int cmd_mesh(const RunConfig& c, std::ostream& out) {
  const PipelineConfig p = pipeline_of(c);
  const LensProfile profile = c.a ? angle_of(*c.a, p).profile : find_lens(c.a_lo, c.a_hi, c.tol_a, p).profile;
  ClusterOptions opt;
  opt.n_theta = c.n_theta;
  opt.n_s = c.n_s;
  opt.annulus_outer = c.annulus_outer;
  const ClusterMesh mesh = build_cluster(profile, opt);
  const MeshReport rep = check_cluster(mesh);
  const fs::path dir = output_dir(c);
  write_text_file(dir / "cluster.obj", to_csv([&](std::ostream& os) { write_obj(os, mesh); }));
  nlohmann::json j = envelope(c);
  j["mesh"] = cluster_metadata_json(mesh, rep);
  j["shrinker_residual_max"] = shrinker_residual_on_curve(profile);
  write_json_file(dir / "cluster.json", j);
  if (c.json) {
    out << j.dump(2) << '\n';
  } else {
    out << "a            " << format17(mesh.a) << '\n'
        << "vertices     " << mesh.V.rows() << ", triangles " << mesh.F.rows() << '\n'
        << "checks       " << (rep.valid() ? "pass" : "FAIL") << '\n'
        << "junction     cap/cap " << format17(rep.from_profile.cap_cap) << " deg, cap/plane "
        << format17(rep.from_profile.upper_plane) << " deg\n"
        << "wrote        " << (dir / "cluster.obj").string() << ", " << (dir / "cluster.json").string() << '\n';
  }
  return rep.valid() ? kOk : kMonitorViolation;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  VerifyOptions opt;
  opt.cfg = pipeline_of(c);
  opt.a_lo = c.a_lo;
  opt.a_hi = c.a_hi;
  opt.tol_a = c.tol_a;
  opt.shoot_samples = c.samples;
  opt.jobs = c.jobs;
  VerifySession session(opt);
  std::vector<CriterionResult> results;
  for (auto* check : {verify_circle, verify_lens, verify_small_a, verify_curvature, verify_monitors, verify_operators,
                      verify_cross_oracle, verify_mesh}) {
    results.push_back(check(session));
    if (!c.json) out << criterion_line(results.back()) << std::endl;
  }
  nlohmann::json j = envelope(c);
  j["criteria"] = criteria_to_json(results);
  const bool ok = std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
  j["pass"] = ok;
  write_json_file(output_dir(c) / "verify.json", j);
  if (c.json) out << j.dump(2) << '\n';
  return ok ? kOk : kFailure;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    if (cfg.command == "solve") return cmd_solve(cfg, out);
    if (cfg.command == "shoot") return cmd_shoot(cfg, out);
    if (cfg.command == "table") return cmd_table(cfg, out);
    if (cfg.command == "mesh") return cmd_mesh(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    throw ConfigError("unknown command: " + cfg.command);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const BracketFailure& e) {
    err << "bracket failure: " << e.what() << '\n';
    return kBracketFailure;
  } catch (const MonitorViolation& e) {
    err << "monitor violation: " << e.what() << '\n';
    return kMonitorViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Rotationally symmetric lens shrinker: profile, shooting, meshes and checks", "lens_cli"};
  app.require_subcommand(1);
  std::string a_text;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--series-tol", cfg.series_tol, "Picard stopping tolerance in the weighted norm");
    sub->add_option("--ode-abs", cfg.ode_abs, "Absolute ODE tolerance");
    sub->add_option("--ode-rel", cfg.ode_rel, "Relative ODE tolerance");
    sub->add_option("--event-tol", cfg.event_tol, "Arclength resolution of the axis crossing");
    sub->add_option("--order", cfg.order, "Series truncation degree (even)");
    sub->add_option("--x-seed", cfg.x_seed, "Abscissa where the series hands off to the graph integrator");
    sub->add_option("--output-dir", cfg.output_dir, "Output directory (default $LENS_OUTPUT_DIR or lens_output)");
    sub->add_flag("--json", cfg.json, "Print the machine-readable report to stdout");
  };
  const auto add_bracket = [&](CLI::App* sub) {
    sub->add_option("--a-lo", cfg.a_lo, "Lower end of the shooting bracket");
    sub->add_option("--a-hi", cfg.a_hi, "Upper end of the shooting bracket");
    sub->add_option("--tol-a", cfg.tol_a, "Bisection stopping width in a");
  };

  CLI::App* solve = app.add_subcommand("solve", "Integrate one profile");
  solve->add_option("--a", a_text, "Height on the axis (number or sqrt2)")->required();
  add_common(solve);

  CLI::App* shoot_cmd = app.add_subcommand("shoot", "Find the height with a 120 degree junction");
  add_bracket(shoot_cmd);
  shoot_cmd->add_option("--samples", cfg.samples, "Heights sampled to detect sign changes");
  shoot_cmd->add_option("--jobs", cfg.jobs, "Worker threads for the sampling table");
  add_common(shoot_cmd);

  CLI::App* table = app.add_subcommand("table", "Terminal angle over a range of heights");
  table->add_option("--from", cfg.from, "First height");
  table->add_option("--to", cfg.to, "Last height");
  table->add_option("--step", cfg.step, "Height increment");
  table->add_option("--jobs", cfg.jobs, "Worker threads");
  add_common(table);

  CLI::App* mesh = app.add_subcommand("mesh", "Export the three-sheet cluster mesh");
  mesh->add_option("--a", a_text, "Height to mesh (default: the lens root)");
  add_bracket(mesh);
  mesh->add_option("--n-theta", cfg.n_theta, "Azimuthal samples");
  mesh->add_option("--n-s", cfg.n_s, "Arclength samples along the profile");
  mesh->add_option("--annulus-outer", cfg.annulus_outer, "Outer radius of the planar sheet (default 3 xi)");
  add_common(mesh);

  CLI::App* verify = app.add_subcommand("verify", "Run every acceptance check");
  add_bracket(verify);
  verify->add_option("--samples", cfg.samples, "Heights sampled to detect sign changes");
  verify->add_option("--jobs", cfg.jobs, "Worker threads for the sampling table");
  add_common(verify);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  for (CLI::App* sub : app.get_subcommands()) cfg.command = sub->get_name();
  try {
    if (!a_text.empty()) cfg.a = parse_height(a_text);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (cfg.output_dir.empty()) {
    const char* env = std::getenv("LENS_OUTPUT_DIR");
    cfg.output_dir = env && *env ? env : "lens_output";
  }
  return run(cfg, out, err);
}

}  // namespace lens::cli
