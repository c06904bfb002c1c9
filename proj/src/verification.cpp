#include "lens/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "lens/cluster_export.hpp"
#include "lens/io.hpp"

namespace lens {

namespace {

using Clock = std::chrono::steady_clock;

template <class Body>
CriterionResult timed(int number, std::string name, Body&& body) {
  CriterionResult r;
  r.number = number;
  r.name = std::move(name);
  const auto t0 = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.summary = std::string("error: ") + e.what();
    r.detail["error"] = e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PipelineConfig report_only(PipelineConfig cfg) {
  cfg.graph.throw_on_violation = false;
  cfg.arc.throw_on_violation = false;
  return cfg;
}

}  // namespace

const ShootReport& VerifySession::shoot_report() {
  if (!shoot_) {
    const auto t0 = Clock::now();
    shoot_ = shoot(opt_.a_lo, opt_.a_hi, opt_.tol_a, opt_.cfg, opt_.shoot_samples, opt_.jobs);
    shoot_seconds_ = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  return *shoot_;
}

CriterionResult verify_circle(VerifySession& s) {
  return timed(1, "circle regression", [&](CriterionResult& r) {
    const auto t0 = Clock::now();
    const AngleResult res = angle_of(kSqrt2, s.options().cfg);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const double s_err = std::abs(res.profile.s_bar - std::numbers::pi / kSqrt2);
    const double alpha_err = std::abs(res.alpha + std::numbers::pi / 2);
    double dev = 0.0;
    for (const auto& st : res.profile.states) {
      const double t = st.s / kSqrt2;
      dev = std::max(dev, std::hypot(st.u - kSqrt2 * std::sin(t), st.v - kSqrt2 * std::cos(t)));
    }
    const double alpha_tol = 1e-8 * std::numbers::pi / 180.0;
    r.pass = s_err < 1e-8 && alpha_err < alpha_tol && dev < 1e-8 && secs < 1.0 && res.profile.monitors_pass();
    r.detail = {{"s_bar", res.profile.s_bar}, {"s_bar_error", s_err}, {"alpha", res.alpha},
                {"alpha_error_rad", alpha_err}, {"alpha_tol_rad", alpha_tol}, {"max_deviation", dev},
                {"monitors_pass", res.profile.monitors_pass()}};
    r.summary = "|s_bar - pi/sqrt2| = " + fmt("%.2e", s_err) + ", |alpha + pi/2| = " + fmt("%.2e", alpha_err) +
                " rad, max deviation " + fmt("%.2e", dev) + ", pipeline " + fmt("%.3f", secs) + " s";
  });
}

CriterionResult verify_lens(VerifySession& s) {
  return timed(2, "lens root a*", [&](CriterionResult& r) {
    const ShootReport& rep = s.shoot_report();
    const double secs = s.shoot_seconds();
    const LensRoot& root = rep.primary();

    const VerifyOptions& o = s.options();
    const LensRoot fine = find_lens(o.a_lo, o.a_hi, o.tol_a / 10.0, o.cfg.tightened(10.0));
    const double drift = std::abs(fine.a_star - root.a_star);

    const bool in_range = root.a_star > 0.0 && root.a_star < kSqrt2;
    r.pass = in_range && root.alpha_residual < 1e-9 && root.vp_residual < 1e-9 && root.profile.monitors_pass() &&
             drift < 1e-7 && secs < 30.0;
    r.detail = {{"a_star", root.a_star},         {"alpha_residual", root.alpha_residual},
                {"vp_residual", root.vp_residual}, {"monitors_pass", root.profile.monitors_pass()},
                {"roots_found", rep.roots.size()}, {"unique_in_bracket", rep.unique_in_bracket},
                {"a_star_tightened", fine.a_star}, {"refinement_drift", drift},
                {"bisection_iterations", root.iterations}};
    r.summary = "a* = " + format17(root.a_star) + ", |u'-1/2| = " + fmt("%.2e", root.alpha_residual) +
                ", |v'+sqrt3/2| = " + fmt("%.2e", root.vp_residual) + ", drift under 10x tightening " +
                fmt("%.2e", drift) + ", shoot " + fmt("%.2f", secs) + " s";
  });
}

CriterionResult verify_small_a(VerifySession& s) {
  return timed(3, "small-a asymptotics", [&](CriterionResult& r) {
    const auto t0 = Clock::now();
    const double x0 = find_x0();
    const AngleResult r1 = angle_of(0.01, s.options().cfg);
    const AngleResult r2 = angle_of(0.005, s.options().cfg);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const double d1 = std::abs(r1.profile.xi - x0), d2 = std::abs(r2.profile.xi - x0);
    const bool decreasing = std::abs(r2.alpha) < std::abs(r1.alpha);
    r.pass = d1 < 0.05 && d2 < 0.05 && decreasing && secs < 5.0;
    r.detail = {{"x0", x0},
                {"rows",
                 {{{"a", 0.01}, {"xi", r1.profile.xi}, {"alpha", r1.alpha}},
                  {{"a", 0.005}, {"xi", r2.profile.xi}, {"alpha", r2.alpha}}}},
                {"alpha_abs_decreasing", decreasing}};
    r.summary = "x0 = " + format17(x0) + ", |xi - x0| = " + fmt("%.2e", d1) + " / " + fmt("%.2e", d2) +
                ", |alpha| = " + fmt("%.4e", std::abs(r1.alpha)) + " > " + fmt("%.4e", std::abs(r2.alpha)) + ", " +
                fmt("%.2f", secs) + " s";
  });
}

CriterionResult verify_curvature(VerifySession& s) {
  return timed(4, "curvature identities", [&](CriterionResult& r) {
    std::vector<LensProfile> profiles;
    for (double a : {0.01, 0.1, 0.5, 1.0, kSqrt2}) profiles.push_back(angle_of(a, report_only(s.options().cfg)).profile);
    profiles.push_back(s.shoot_report().primary().profile);

    double worst_int = 0.0, worst_var = 0.0, worst_k0 = 0.0;
    r.detail["profiles"] = nlohmann::json::array();
    for (const auto& p : profiles) {
      double e_int = 0.0, e_var = 0.0;
      for (const auto& st : p.states) {
        const Curvatures k = curvature_three_ways(st);
        e_int = std::max(e_int, std::abs(k.k_alg - k.k_int));
        e_var = std::max(e_var, std::abs(k.k_alg - k.k_var));
      }
      const Curvatures k0 = curvature_three_ways(p.states.front());
      const double e_k0 = std::max({std::abs(k0.k_alg + p.a / 2), std::abs(k0.k_int + p.a / 2),
                                    std::abs(k0.k_var + p.a / 2), std::abs(p.states.front().k + p.a / 2)});
      worst_int = std::max(worst_int, e_int);
      worst_var = std::max(worst_var, e_var);
      worst_k0 = std::max(worst_k0, e_k0);
      r.detail["profiles"].push_back({{"a", p.a}, {"s_first", p.states.front().s}, {"k_alg_minus_k_int", e_int},
                                      {"k_alg_minus_k_var", e_var}, {"k0_error", e_k0}});
    }
    r.pass = worst_int < 1e-8 && worst_var < 1e-8 && worst_k0 < 1e-8;
    r.summary = "max |k_alg - k_int| = " + fmt("%.2e", worst_int) + ", max |k_alg - k_var| = " +
                fmt("%.2e", worst_var) + ", |k(0+) + a/2| = " + fmt("%.2e", worst_k0) + " over " +
                std::to_string(profiles.size()) + " profiles";
  });
}

CriterionResult verify_monitors(VerifySession& s) {
  return timed(5, "inequality monitors", [&](CriterionResult& r) {
    r.pass = true;
    long evaluated = 0, violations = 0;
    r.detail["profiles"] = nlohmann::json::array();
    for (double a : {0.1, 0.5, 1.0, kSqrt2}) {
      const LensProfile p = angle_of(a, report_only(s.options().cfg)).profile;
      for (const auto& m : p.monitors) {
        evaluated += m.evaluated;
        violations += m.violations;
      }
      r.pass = r.pass && p.monitors_pass();
      r.detail["profiles"].push_back({{"a", a}, {"pass", p.monitors_pass()}, {"monitors", monitors_to_json(p.monitors)}});
    }
    r.summary = std::to_string(violations) + " violations in " + std::to_string(evaluated) +
                " monitor evaluations at a = 0.1, 0.5, 1, sqrt2";
  });
}

CriterionResult verify_operators(VerifySession&) {
  return timed(6, "operator and series identities", [&](CriterionResult& r) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double roundtrip = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Series g = Series::zero(40);
      for (Eigen::Index k = 0; k < g.coeffs().size(); ++k) g.coeffs()(k) = coef(rng);
      const Series back = apply_L(invert_L(g));
      roundtrip = std::max(roundtrip, (back.coeffs() - g.coeffs()).cwiseAbs().maxCoeff());
    }

    const int order = 64;
    const Series eta = eta_coefficients<double>(order);
    const Series J = j_function<double>(order);
    const double l_eta = apply_L(eta).coeffs().cwiseAbs().maxCoeff();
    Series lj = apply_L(J);
    lj.coeffs()(0) -= 1.0;
    const double l_j = lj.coeffs().cwiseAbs().maxCoeff();

    bool norms_ok = true;
    nlohmann::json norms = nlohmann::json::array();
    for (double rr : {0.5, 1.0, 2.0}) {
      const double n = weighted_norm(J, rr), bound = 0.5 * rr * std::exp(0.5 * rr * rr);
      norms_ok = norms_ok && n <= bound;
      norms.push_back({{"r", rr}, {"norm", n}, {"bound", bound}});
    }

    const CertificateReport cert = contraction_certificate(
        {kSqrt2, 1.0 / (36.0 * kSqrt2), 6.0 * kSqrt2, 0.5, Flavor::C2});

    const double r_scale = std::min(1.0, certified_radius(0.1, 1.0));
    const auto aj = [&](double a) {
      const PicardResult p = picard_analytic(a, r_scale);
      return weighted_norm(p.h + a * J.truncated(p.h.order()), r_scale);
    };
    const double d_hi = aj(0.1), d_lo = aj(0.01);
    const double slope = std::log10(d_hi / d_lo);

    r.pass = roundtrip < 1e-13 && l_eta < 1e-13 && l_j < 1e-13 && norms_ok && cert.certified &&
             std::abs(slope - 3.0) < 0.1;
    r.detail = {{"L_invL_max_error", roundtrip}, {"L_eta_max", l_eta},    {"L_J_minus_1_max", l_j},
                {"J_norms", norms},              {"certificate", certificate_to_json(cert)},
                {"certified", cert.certified},   {"aj_radius", r_scale},  {"aj_distance_a0.1", d_hi},
                {"aj_distance_a0.01", d_lo},     {"aj_decade_slope", slope}};
    r.summary = "L(L^-1 g) - g = " + fmt("%.1e", roundtrip) + ", L eta = " + fmt("%.1e", l_eta) + ", L J - 1 = " +
                fmt("%.1e", l_j) + ", certificate " + (cert.certified ? "passes" : "FAILS") +
                ", ||h+aJ|| decade slope " + fmt("%.3f", slope);
  });
}

CriterionResult verify_cross_oracle(VerifySession&) {
  return timed(7, "analytic vs C2 oracle", [&](CriterionResult& r) {
    const double r_star = 1.0 / (36.0 * kSqrt2);
    double worst = 0.0;
    r.detail["heights"] = nlohmann::json::array();
    std::vector<std::pair<double, std::vector<ProfileSample>>> oracle;
    for (double a : {0.5, 1.0, kSqrt2}) {
      const PicardResult series = picard_analytic(a, r_star);
      const C2OracleResult c2 = picard_c2_oracle(a, r_star);
      double d_h = 0.0, d_hp = 0.0, d_hpp = 0.0;
      for (const auto& smp : c2.samples) {
        d_h = std::max(d_h, std::abs(series.h(smp.x) - (smp.f - a)));
        d_hp = std::max(d_hp, std::abs(series.h.derivative(smp.x) - smp.fp));
        d_hpp = std::max(d_hpp, std::abs(series.h.second_derivative(smp.x) - smp.fpp));
      }
      worst = std::max({worst, d_h, d_hp, d_hpp});
      r.detail["heights"].push_back({{"a", a}, {"sup_h", d_h}, {"sup_hp", d_hp}, {"sup_hpp", d_hpp},
                                     {"oracle_iterations", c2.iterations}, {"hpp_sup", c2.hpp_sup}});
      oracle.emplace_back(a, c2.samples);
    }
    // Lipschitz quotient of h'' in a, on the oracle solutions plus one close pair.
    oracle.emplace_back(1.01, picard_c2_oracle(1.01, r_star).samples);
    double quotient = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      for (std::size_t j = i + 1; j < oracle.size(); ++j) {
        double sup = 0.0;
        for (std::size_t k = 0; k < oracle[i].second.size(); ++k)
          sup = std::max(sup, std::abs(oracle[i].second[k].fpp - oracle[j].second[k].fpp));
        quotient = std::max(quotient, sup / std::abs(oracle[i].first - oracle[j].first));
      }
    }
    r.pass = worst < 1e-8 && quotient <= 37.0 / 12.0;
    r.detail["max_sup_difference"] = worst;
    r.detail["lipschitz_quotient"] = quotient;
    r.detail["lipschitz_bound"] = 37.0 / 12.0;
    r.summary = "sup |analytic - C2| = " + fmt("%.2e", worst) + " on [0, 1/(36 sqrt2)], Lipschitz quotient " +
                fmt("%.4f", quotient) + " <= 37/12";
  });
}

CriterionResult verify_mesh(VerifySession& s) {
  return timed(8, "cluster mesh", [&](CriterionResult& r) {
    const LensRoot& root = s.shoot_report().primary();
    const MeshReport lens = check_cluster(build_cluster(root.profile));
    const LensProfile sphere = angle_of(kSqrt2, s.options().cfg).profile;
    const MeshReport round = check_cluster(build_cluster(sphere));
    const double radius_err = std::max(std::abs(round.cap_radius_min - kSqrt2), std::abs(round.cap_radius_max - kSqrt2));
    const double angle_err = std::max({std::abs(lens.from_profile.cap_cap - 120.0),
                                       std::abs(lens.from_profile.upper_plane - 120.0),
                                       std::abs(lens.from_profile.lower_plane - 120.0)});
    const double mesh_angle_err = std::max({std::abs(lens.from_mesh.cap_cap - 120.0),
                                            std::abs(lens.from_mesh.upper_plane - 120.0),
                                            std::abs(lens.from_mesh.lower_plane - 120.0)});
    r.pass = lens.valid() && round.valid() && radius_err < 1e-6 && angle_err < 1e-6 && mesh_angle_err < 0.05;
    r.detail = {{"lens", mesh_report_to_json(lens)}, {"sphere", mesh_report_to_json(round)},
                {"sphere_radius_error", radius_err}, {"junction_angle_error_deg", angle_err},
                {"mesh_junction_angle_error_deg", mesh_angle_err}};
    r.summary = std::string("lens mesh ") + (lens.valid() ? "valid" : "INVALID") + ", junction angles off 120 by " +
                fmt("%.1e", angle_err) + " deg (mesh " + fmt("%.1e", mesh_angle_err) + "), sphere radii within " +
                fmt("%.1e", radius_err);
  });
}

std::vector<CriterionResult> verify_all(VerifySession& s) {
  return {verify_circle(s),    verify_lens(s),      verify_small_a(s),      verify_curvature(s),
          verify_monitors(s),  verify_operators(s), verify_cross_oracle(s), verify_mesh(s)};
}

std::string criterion_line(const CriterionResult& r) {
  return std::string(r.pass ? "[PASS] " : "[FAIL] ") + std::to_string(r.number) + " " + r.name + " (" +
         fmt("%.2f", r.seconds) + " s): " + r.summary;
}

nlohmann::json criteria_to_json(const std::vector<CriterionResult>& results) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results)
    j.push_back({{"criterion", r.number}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  return j;
}

}  // namespace lens
