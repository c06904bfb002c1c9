#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "lens/errors.hpp"
#include "lens/shooting.hpp"

using namespace lens;
using std::numbers::pi;

namespace {

// Root of u'(s_bar) = 1/2 from an independent mpmath/scipy integration of the
// arclength system started on the axis (DOP853, tolerance 1e-13).
constexpr double kLensReference = 0.78600398617689;

bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }

}  // namespace

TEST_CASE("angle_of endpoints") {
  const AngleResult circle = angle_of(kSqrt2);
  CHECK(std::abs(circle.alpha + pi / 2) < 1e-8);
  CHECK(circle.profile.monitors_pass());

  const AngleResult small = angle_of(0.01);
  CHECK(small.alpha < 0.0);
  CHECK(small.alpha > -0.2);

  CHECK_THROWS_AS(angle_of(0.0), ConfigError);
  CHECK_THROWS_AS(angle_of(1.5), ConfigError);
}

TEST_CASE("alpha is negative and g changes sign on the default bracket") {
  for (double a : {0.05, 0.1, 0.3, 0.6, 0.9, 1.2, 1.4, kSqrt2}) {
    CAPTURE(a);
    const AngleResult r = angle_of(a);
    CHECK(r.alpha < 0.0);
    CHECK(r.alpha >= -pi / 2 - 1e-12);
    CHECK(r.profile.monitors_pass());
    // g = u'(s_bar) - 1/2 agrees with cos(alpha) - 1/2.
    CHECK(lens_defect(r.profile) == doctest::Approx(std::cos(r.alpha) - 0.5).epsilon(1e-12));
  }
  CHECK(lens_defect(angle_of(0.05).profile) * lens_defect(angle_of(kSqrt2).profile) < 0.0);
}

TEST_CASE("angle_of is bitwise deterministic") {
  const double a = 0.73;
  const AngleResult x = angle_of(a), y = angle_of(a);
  CHECK(same_bits(x.alpha, y.alpha));
  CHECK(same_bits(x.profile.s_bar, y.profile.s_bar));
  CHECK(x.profile.states.size() == y.profile.states.size());
}

TEST_CASE("find_lens locates the 120 degree lens") {
  const double lo = 0.05, hi = kSqrt2, tol = 1e-10;
  const LensRoot root = find_lens(lo, hi, tol);
  CHECK(root.a_star > 0.0);
  CHECK(root.a_star < kSqrt2);
  CHECK(std::abs(root.a_star - kLensReference) < 1e-8);
  CHECK(root.alpha_residual < 1e-9);
  CHECK(root.vp_residual < 1e-9);
  CHECK(root.profile.monitors_pass());
  CHECK(terminal_angle(root.profile) == doctest::Approx(-pi / 3).epsilon(1e-8));

  CHECK(root.iterations <= static_cast<int>(std::ceil(std::log2((hi - lo) / tol))));
  REQUIRE(root.bracket_history.size() == static_cast<std::size_t>(root.iterations) + 1);
  for (std::size_t i = 1; i < root.bracket_history.size(); ++i) {
    const auto [l0, h0] = root.bracket_history[i - 1];
    const auto [l1, h1] = root.bracket_history[i];
    CHECK(h1 - l1 == doctest::Approx(0.5 * (h0 - l0)).epsilon(1e-9));
    CHECK(l1 >= l0);
    CHECK(h1 <= h0);
    CHECK(l1 <= root.a_star);
    CHECK(root.a_star <= h1);
  }
  CHECK(root.bracket_history.back().second - root.bracket_history.back().first < tol);

  const LensRoot again = find_lens(lo, hi, tol);
  CHECK(same_bits(again.a_star, root.a_star));
}

TEST_CASE("find_lens rejects bad brackets") {
  CHECK_THROWS_AS(find_lens(0.9, kSqrt2, 1e-8), BracketFailure);
  CHECK_THROWS_AS(find_lens(0.1, 0.5, 1e-8), BracketFailure);
  CHECK_THROWS_AS(find_lens(1.0, 0.5, 1e-8), ConfigError);
  CHECK_THROWS_AS(find_lens(0.0, 0.5, 1e-8), ConfigError);
  CHECK_THROWS_AS(find_lens(0.1, 1.0, 0.0), ConfigError);
}

TEST_CASE("tightening the tolerances moves a* very little") {
  const LensRoot base = find_lens(0.5, 1.0, 1e-10);
  const PipelineConfig tight = PipelineConfig{}.tightened(10.0);
  const LensRoot fine = find_lens(0.5, 1.0, 1e-11, tight);
  CHECK(std::abs(base.a_star - fine.a_star) < 1e-7);
}

TEST_CASE("tightened divides every tolerance") {
  PipelineConfig c;
  c.set_ode_tolerances(1e-10, 1e-9);
  CHECK(c.graph.step.abs_tol == 1e-10);
  CHECK(c.arc.step.rel_tol == 1e-9);
  const PipelineConfig t = c.tightened(10.0);
  CHECK(t.series_tol == doctest::Approx(c.series_tol / 10));
  CHECK(t.graph.step.abs_tol == doctest::Approx(1e-11));
  CHECK(t.graph.step.rel_tol == doctest::Approx(1e-10));
  CHECK(t.arc.step.abs_tol == doctest::Approx(1e-11));
  CHECK(t.arc.event_tol == doctest::Approx(c.arc.event_tol / 10));
  CHECK(t.arc.unit_tol == doctest::Approx(c.arc.unit_tol / 10));
  CHECK(t.order == c.order);
}

TEST_CASE("angle table") {
  const std::vector<double> values{1.2, 0.01, kSqrt2, 0.5, 2.0, 0.005};
  const std::vector<AngleRow> seq = sample_angle_table(values, {}, 1);
  const std::vector<AngleRow> par = sample_angle_table(values, {}, 4);
  REQUIRE(seq.size() == values.size());
  for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i].a > seq[i - 1].a);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CAPTURE(seq[i].a);
    CHECK(same_bits(seq[i].alpha, par[i].alpha));
    CHECK(seq[i].error == par[i].error);
  }
  // a = 2 is outside the domain: recorded, not thrown.
  CHECK_FALSE(seq.back().error.empty());
  CHECK_FALSE(seq.back().monitor_pass);
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    CHECK(seq[i].error.empty());
    CHECK(seq[i].monitor_pass);
  }
  // Endpoint rows match angle_of.
  CHECK(same_bits(seq[4].alpha, angle_of(kSqrt2).alpha));
  CHECK(same_bits(seq[1].alpha, angle_of(0.01).alpha));
  // xi approaches x0 as a shrinks.
  const double x0 = find_x0();
  CHECK(std::abs(seq[0].xi - x0) < std::abs(seq[2].xi - x0));
  CHECK(std::abs(seq[0].xi - x0) < 1e-3);

  std::ostringstream os;
  write_angle_csv(os, seq);
  CHECK(os.str().rfind("a,s_bar,xi_a,alpha_deg,pass\n", 0) == 0);
  CHECK(angle_rows_to_json(seq).size() == seq.size());
}

TEST_CASE("s_bar is continuous in a") {
  std::vector<double> values;
  for (int i = 0; i <= 20; ++i) values.push_back(0.7 + 1e-3 * i);
  const std::vector<AngleRow> rows = sample_angle_table(values, {}, 2);
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) worst = std::max(worst, std::abs(rows[i].s_bar - rows[i - 1].s_bar));
  CHECK(worst < 1e-2);
  CHECK(worst > 0.0);
}

TEST_CASE("shoot reports the sampled table and every root") {
  const ShootReport rep = shoot(0.05, kSqrt2, 1e-10, {}, 8, 2);
  CHECK(rep.table.size() == 8);
  REQUIRE(rep.roots.size() == 1);
  CHECK(rep.unique_in_bracket);
  CHECK(std::abs(rep.primary().a_star - kLensReference) < 1e-8);
  const auto j = shoot_report_to_json(rep);
  for (const char* key : {"a_star", "alpha_residual", "vp_residual", "roots", "table", "unique_in_bracket"})
    CHECK(j.contains(key));
  CHECK(j["alpha_residual"].get<double>() < 1e-9);

  CHECK_THROWS_AS(shoot(0.9, kSqrt2, 1e-10), BracketFailure);
  CHECK_THROWS_AS(shoot(0.5, 0.4, 1e-10), ConfigError);
}
