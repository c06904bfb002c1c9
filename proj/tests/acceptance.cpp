// End-to-end acceptance run: every criterion through the library, with the
// command-line paths for criteria 1, 2 and 8 exercised as well.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lens/cli.hpp"
#include "lens/verification.hpp"

namespace fs = std::filesystem;
using lens::CriterionResult;
using lens::kSqrt2;

namespace {

using Clock = std::chrono::steady_clock;

struct CliCheck {
  bool pass = false;
  double seconds = 0.0;
  std::string summary;
};

nlohmann::json run_cli(const std::vector<std::string>& args, const fs::path& json_file, int& code, double& seconds) {
  std::ostringstream out, err;
  const auto t0 = Clock::now();
  code = lens::cli::run(args, out, err);
  seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (code != 0) {
    std::cerr << err.str();
    return {};
  }
  std::ifstream in(json_file);
  return nlohmann::json::parse(in);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

CliCheck cli_circle(const fs::path& root) {
  const fs::path dir = root / "solve";
  int code = 0;
  CliCheck c;
  const auto j = run_cli({"solve", "--a", "sqrt2", "--output-dir", dir.string()}, dir / "profile.json", code, c.seconds);
  if (code != 0) return {false, c.seconds, "solve exited with " + std::to_string(code)};
  const double s_err = std::abs(j["profile"]["s_bar"].get<double>() - std::numbers::pi / kSqrt2);
  const double a_err = std::abs(j["profile"]["alpha"].get<double>() + std::numbers::pi / 2);
  c.pass = s_err < 1e-8 && a_err < 1e-8 * std::numbers::pi / 180 && c.seconds < 1.0;
  c.summary = "solve --a sqrt2: s_bar err " + sci(s_err) + ", alpha err " + sci(a_err) + " rad";
  return c;
}

CliCheck cli_shoot(const fs::path& root) {
  const fs::path dir = root / "shoot";
  int code = 0;
  CliCheck c;
  const auto j = run_cli({"shoot", "--output-dir", dir.string()}, dir / "shoot.json", code, c.seconds);
  if (code != 0) return {false, c.seconds, "shoot exited with " + std::to_string(code)};
  const auto& r = j["report"];
  const double a_star = r["a_star"];
  c.pass = a_star > 0.0 && a_star < kSqrt2 && r["alpha_residual"].get<double>() < 1e-9 &&
           r["vp_residual"].get<double>() < 1e-9 && c.seconds < 30.0;
  c.summary = "shoot: a* " + std::to_string(a_star) + ", residual " + sci(r["alpha_residual"].get<double>());
  return c;
}

CliCheck cli_mesh(const fs::path& root) {
  CliCheck c;
  int code = 0;
  double t = 0.0;
  const fs::path lens_dir = root / "mesh_lens", sphere_dir = root / "mesh_sphere";
  const auto lens = run_cli({"mesh", "--output-dir", lens_dir.string()}, lens_dir / "cluster.json", code, t);
  c.seconds += t;
  if (code != 0) return {false, c.seconds, "mesh exited with " + std::to_string(code)};
  const auto sphere =
      run_cli({"mesh", "--a", "sqrt2", "--output-dir", sphere_dir.string()}, sphere_dir / "cluster.json", code, t);
  c.seconds += t;
  if (code != 0) return {false, c.seconds, "mesh --a sqrt2 exited with " + std::to_string(code)};
  const auto& lc = lens["mesh"]["checks"];
  const auto& sc = sphere["mesh"]["checks"];
  const double r_err = std::max(std::abs(sc["cap_radius_min"].get<double>() - kSqrt2),
                                std::abs(sc["cap_radius_max"].get<double>() - kSqrt2));
  c.pass = lc["reflection_symmetric"] == true && lc["junction_coherent"] == true && lc["oriented"] == true &&
           sc["valid"] == true && r_err < 1e-6;
  c.summary = "mesh: lens checks " + std::string(lc["valid"] == true ? "pass" : "fail") + ", sphere radius err " +
              sci(r_err);
  return c;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "lens_acceptance";
  fs::remove_all(root);

  lens::VerifySession session;
  using Check = std::function<CriterionResult(lens::VerifySession&)>;
  using Extra = std::function<CliCheck(const fs::path&)>;
  const std::vector<std::pair<Check, Extra>> plan = {
      {lens::verify_circle, cli_circle},   {lens::verify_lens, cli_shoot},       {lens::verify_small_a, nullptr},
      {lens::verify_curvature, nullptr},   {lens::verify_monitors, nullptr},     {lens::verify_operators, nullptr},
      {lens::verify_cross_oracle, nullptr}, {lens::verify_mesh, cli_mesh},
  };

  int failed = 0;
  for (const auto& [check, extra] : plan) {
    CriterionResult r;
    try {
      r = check(session);
    } catch (const std::exception& e) {
      r.pass = false;
      r.summary = std::string("threw: ") + e.what();
    }
    if (extra) {
      CliCheck c;
      try {
        c = extra(root);
      } catch (const std::exception& e) {
        c = {false, 0.0, std::string("cli threw: ") + e.what()};
      }
      r.pass = r.pass && c.pass;
      r.seconds += c.seconds;
      r.summary += "; " + c.summary + (c.pass ? "" : " [cli FAIL]");
    }
    failed += r.pass ? 0 : 1;
    std::cout << lens::criterion_line(r) << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
