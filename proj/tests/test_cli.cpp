#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lens/cli.hpp"
#include "lens/errors.hpp"
#include "lens/types.hpp"

using namespace lens;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lens_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

// Rebuilds a run configuration from the echo embedded in an output file.
cli::RunConfig from_echo(const nlohmann::json& c) {
  cli::RunConfig r;
  r.command = c["command"];
  if (!c["a"].is_null()) r.a = c["a"].get<double>();
  r.a_lo = c["a_lo"];
  r.a_hi = c["a_hi"];
  r.series_tol = c["series_tol"];
  r.ode_abs = c["ode_abs"];
  r.ode_rel = c["ode_rel"];
  r.event_tol = c["event_tol"];
  r.tol_a = c["tol_a"];
  r.order = c["order"];
  r.x_seed = c["x_seed"];
  r.output_dir = c["output_dir"];
  r.from = c["from"];
  r.to = c["to"];
  r.step = c["step"];
  r.jobs = c["jobs"];
  r.samples = c["samples"];
  r.n_theta = c["n_theta"];
  r.n_s = c["n_s"];
  r.annulus_outer = c["annulus_outer"];
  return r;
}

}  // namespace

TEST_CASE("height parsing") {
  CHECK(cli::parse_height("sqrt2") == kSqrt2);
  CHECK(cli::parse_height("0.5") == 0.5);
  CHECK(cli::parse_height("1.41421356") == 1.41421356);
  CHECK_THROWS_AS(cli::parse_height("half"), ConfigError);
  CHECK_THROWS_AS(cli::parse_height("0.5x"), ConfigError);
}

TEST_CASE("solve writes the profile and echoes the configuration") {
  const fs::path dir = fresh_dir("solve");
  const Outcome o = call({"solve", "--a", "1.41421356", "--output-dir", dir.string()});
  CHECK(o.code == cli::kOk);
  CHECK(fs::exists(dir / "profile.csv"));
  CHECK(fs::exists(dir / "graph.csv"));
  const nlohmann::json j = read_json(dir / "profile.json");
  CHECK(j["config"]["command"] == "solve");
  CHECK(j["config"]["a"].get<double>() == 1.41421356);
  CHECK(j.contains("pipeline"));
  CHECK(std::abs(j["profile"]["alpha_deg"].get<double>() + 90.0) < 1e-3);
  CHECK(j["profile"]["monitors_pass"] == true);

  const fs::path exact = fresh_dir("solve_exact");
  REQUIRE(call({"solve", "--a", "sqrt2", "--output-dir", exact.string(), "--json"}).code == cli::kOk);
  const nlohmann::json e = read_json(exact / "profile.json");
  CHECK(std::abs(e["profile"]["s_bar"].get<double>() - std::numbers::pi / kSqrt2) < 1e-8);
  CHECK(std::abs(e["profile"]["alpha"].get<double>() + std::numbers::pi / 2) < 1e-8 * std::numbers::pi / 180);
}

TEST_CASE("configuration errors exit with 2") {
  const std::string dir = fresh_dir("bad").string();
  CHECK(call({"solve", "--output-dir", dir}).code == cli::kConfigError);
  CHECK(call({"solve", "--a", "2", "--output-dir", dir}).code == cli::kConfigError);
  CHECK(call({"solve", "--a", "0", "--output-dir", dir}).code == cli::kConfigError);
  CHECK(call({"solve", "--a", "abc", "--output-dir", dir}).code == cli::kConfigError);
  CHECK(call({"solve", "--a", "1", "--ode-abs", "-1e-10", "--output-dir", dir}).code == cli::kConfigError);
  CHECK(call({"solve", "--a", "1", "--order", "7", "--output-dir", dir}).code == cli::kConfigError);
  CHECK(call({"shoot", "--a-lo", "1.0", "--a-hi", "0.5", "--output-dir", dir}).code == cli::kConfigError);
  CHECK(call({"table", "--from", "1", "--to", "0.5", "--output-dir", dir}).code == cli::kConfigError);
  CHECK(call({"frobnicate"}).code == cli::kConfigError);
  CHECK(call({}).code == cli::kConfigError);
  CHECK_FALSE(fs::exists(fs::path(dir) / "profile.json"));
}

TEST_CASE("a bracket without a sign change exits with 3") {
  const Outcome o = call({"shoot", "--a-lo", "0.9", "--output-dir", fresh_dir("bracket").string()});
  CHECK(o.code == cli::kBracketFailure);
  CHECK(o.err.find("bracket") != std::string::npos);
}

TEST_CASE("a failing monitor exits with 4") {
  // A four-term series evaluated far from the axis is a poor seed.
  const Outcome o = call({"solve", "--a", "1", "--series-tol", "1", "--order", "4", "--x-seed", "0.45",
                          "--output-dir", fresh_dir("monitor").string()});
  CHECK(o.code == cli::kMonitorViolation);
  CHECK(o.err.find("shrinker_residual") != std::string::npos);
}

TEST_CASE("shoot reports the lens") {
  const fs::path dir = fresh_dir("shoot");
  REQUIRE(call({"shoot", "--output-dir", dir.string()}).code == cli::kOk);
  const nlohmann::json j = read_json(dir / "shoot.json");
  const double a_star = j["report"]["a_star"];
  CHECK(a_star > 0.0);
  CHECK(a_star < kSqrt2);
  CHECK(j["report"]["alpha_residual"].get<double>() < 1e-9);
  CHECK(j["report"]["vp_residual"].get<double>() < 1e-9);
  CHECK(j["config"]["tol_a"].get<double>() == 1e-10);
  CHECK(fs::exists(dir / "lens_profile.csv"));
}

TEST_CASE("table writes one row per height") {
  const fs::path dir = fresh_dir("table");
  REQUIRE(call({"table", "--from", "0.1", "--to", "1.3", "--step", "0.2", "--jobs", "3", "--output-dir", dir.string()})
              .code == cli::kOk);
  const nlohmann::json j = read_json(dir / "angle_table.json");
  REQUIRE(j["table"].size() == 7);
  CHECK(j["table"][0]["a"].get<double>() == doctest::Approx(0.1));
  CHECK(j["table"][6]["a"].get<double>() == doctest::Approx(1.3));
  std::istringstream csv(slurp(dir / "angle_table.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 8);
}

TEST_CASE("mesh exports OBJ and metadata") {
  const fs::path dir = fresh_dir("mesh");
  REQUIRE(call({"mesh", "--a", "sqrt2", "--n-theta", "24", "--n-s", "32", "--output-dir", dir.string()}).code ==
          cli::kOk);
  const nlohmann::json j = read_json(dir / "cluster.json");
  CHECK(j["mesh"]["checks"]["valid"] == true);
  CHECK(std::abs(j["mesh"]["checks"]["cap_radius_min"].get<double>() - kSqrt2) < 1e-6);
  CHECK(std::abs(j["mesh"]["checks"]["cap_radius_max"].get<double>() - kSqrt2) < 1e-6);
  const std::string obj = slurp(dir / "cluster.obj");
  CHECK(obj.find("g upper_cap") != std::string::npos);
  CHECK(obj.find("g planar_annulus") != std::string::npos);
  CHECK(call({"mesh", "--a", "1", "--n-theta", "8", "--output-dir", dir.string()}).code == cli::kConfigError);
}

TEST_CASE("outputs are reproducible from the echoed configuration") {
  const fs::path dir = fresh_dir("repro");
  REQUIRE(call({"solve", "--a", "0.8", "--ode-abs", "1e-11", "--output-dir", dir.string()}).code == cli::kOk);
  const std::string json1 = slurp(dir / "profile.json"), csv1 = slurp(dir / "profile.csv");
  const cli::RunConfig cfg = from_echo(read_json(dir / "profile.json")["config"]);
  std::ostringstream out, err;
  REQUIRE(cli::run(cfg, out, err) == cli::kOk);
  CHECK(slurp(dir / "profile.json") == json1);
  CHECK(slurp(dir / "profile.csv") == csv1);

  const fs::path mdir = fresh_dir("repro_mesh");
  REQUIRE(call({"mesh", "--n-theta", "16", "--n-s", "16", "--output-dir", mdir.string()}).code == cli::kOk);
  const std::string obj1 = slurp(mdir / "cluster.obj"), meta1 = slurp(mdir / "cluster.json");
  REQUIRE(cli::run(from_echo(read_json(mdir / "cluster.json")["config"]), out, err) == cli::kOk);
  CHECK(slurp(mdir / "cluster.obj") == obj1);
  CHECK(slurp(mdir / "cluster.json") == meta1);
}

TEST_CASE("output directory falls back to LENS_OUTPUT_DIR") {
  const fs::path dir = fresh_dir("env");
  ::setenv("LENS_OUTPUT_DIR", dir.string().c_str(), 1);
  const Outcome o = call({"solve", "--a", "0.6"});
  ::unsetenv("LENS_OUTPUT_DIR");
  CHECK(o.code == cli::kOk);
  CHECK(fs::exists(dir / "profile.json"));
  CHECK(read_json(dir / "profile.json")["config"]["output_dir"] == dir.string());
}

TEST_CASE("verify passes on the default configuration") {
  const fs::path dir = fresh_dir("verify");
  const Outcome o = call({"verify", "--output-dir", dir.string()});
  CHECK(o.code == cli::kOk);
  const nlohmann::json j = read_json(dir / "verify.json");
  CHECK(j["pass"] == true);
  CHECK(j["criteria"].size() == 8);
  std::istringstream lines(o.out);
  std::string line;
  int pass_lines = 0;
  while (std::getline(lines, line)) pass_lines += line.rfind("[PASS]", 0) == 0;
  CHECK(pass_lines == 8);
}
