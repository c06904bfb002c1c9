#include "lens/series_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lens/errors.hpp"
#include "lens/quadrature.hpp"

namespace lens {
namespace {

InequalityCheck make_check(std::string id, double lhs, double rhs, bool sufficient_only = false) {
  InequalityCheck c;
  c.inequality_id = std::move(id);
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.sufficient_only = sufficient_only;
  // Sufficient conditions are often constructed with equality, so they get a
  // tolerant comparison; the verdict inequalities must clear the margin.
  c.pass = sufficient_only ? c.slack >= -kCertificateMargin * std::max(1.0, std::abs(rhs))
                           : c.slack >= kCertificateMargin;
  return c;
}

}  // namespace

double regime_C(double r) {
  return std::numbers::sqrt2 / (std::exp(r * r / 4.0) * std::sqrt(3.0 * (1.0 + r * r)));
}

double regime_K(double r) { return 1.0 / (r * std::exp(r * r / 2.0)); }

CertificateReport contraction_certificate(const ContractionConstants& c) {
  if (!(c.a > 0.0 && c.r > 0.0 && c.R > 0.0 && c.L > 0.0))
    throw std::invalid_argument("contraction_certificate: constants must be positive");

  CertificateReport report;
  report.constants = c;
  const double a = c.a, r = c.r, R = c.R, L = c.L;
  const double r2 = r * r, R2 = R * R, R3 = R2 * R;

  if (c.flavor == Flavor::C2) {
    const double self_map = 1.5 * a + 2.25 * r2 * R + 1.5 * a * r2 * R2 + 1.5 * (r2 + 1.5 * r2 * r2) * R3;
    const double lipschitz = r2 * (2.25 + 4.5 * R2 + 3.0 * a * R2 + 6.75 * R2 * r2);
    report.checks.push_back(make_check("c2_self_map", self_map, R));
    report.checks.push_back(make_check("c2_contraction", lipschitz, L));
    report.checks.push_back(make_check("contraction_factor_below_one", L, 1.0));
  } else {
    const double e = std::exp(r2 / 2.0);
    const double self_map = e * (0.5 * a * r + 0.25 * (1.0 + r2) * R3 + 0.25 * a * r * R2);
    const double lipschitz = e * (0.75 * (1.0 + r2) * R2 + 0.5 * a * r * R);
    report.checks.push_back(make_check("analytic_self_map", self_map, R));
    report.checks.push_back(make_check("analytic_contraction", lipschitz, L));
    report.checks.push_back(make_check("contraction_factor_below_one", L, 1.0));
    report.checks.push_back(make_check("regime_ball_radius", R, regime_C(r) * std::sqrt(L), true));
    report.checks.push_back(make_check("regime_height", a, regime_K(r) * R, true));
  }

  report.certified = std::all_of(report.checks.begin(), report.checks.end(),
                                 [](const InequalityCheck& k) { return k.sufficient_only || k.pass; });
  return report;
}

ContractionConstants lwp_constants(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("lwp_constants: a must be positive");
  ContractionConstants c;
  c.a = a;
  c.R = 6.0 * a;
  c.r = std::min({1.0 / (3.0 * std::numbers::sqrt2), 1.0 / (36.0 * a),
                  1.0 / (12.0 * std::sqrt(6.0) * std::pow(a, 1.5))});
  c.L = 0.5;
  c.flavor = Flavor::C2;
  return c;
}

std::optional<ContractionConstants> derive_analytic_constants(double a, double r) {
  if (!(a > 0.0 && r > 0.0)) throw std::invalid_argument("derive_analytic_constants: a and r must be positive");
  const double e = std::exp(r * r / 2.0);
  const auto self_map = [&](double R) { return e * (0.5 * a * r + 0.25 * (1.0 + r * r) * R * R * R + 0.25 * a * r * R * R); };

  // R <- self_map(R) increases monotonically to the smallest fixed point when one exists.
  double R = 0.0;
  bool converged = false;
  for (int it = 0; it < 100000; ++it) {
    const double next = self_map(R);
    if (!std::isfinite(next) || next > 1e6) return std::nullopt;
    if (next - R <= 1e-15 * next) {
      R = next;
      converged = true;
      break;
    }
    R = next;
  }
  if (!converged) return std::nullopt;

  ContractionConstants c;
  c.a = a;
  c.r = r;
  c.R = R * (1.0 + 1e-6) + 4.0 * kCertificateMargin;
  c.L = e * (0.75 * (1.0 + r * r) * c.R * c.R + 0.5 * a * r * c.R) + 2.0 * kCertificateMargin;
  c.flavor = Flavor::Analytic;
  if (!(c.L < 1.0)) return std::nullopt;
  if (!contraction_certificate(c).certified) return std::nullopt;
  return c;
}

double certified_radius(double a, double r_max) {
  if (derive_analytic_constants(a, r_max)) return r_max;
  double lo = 1e-9, hi = r_max;
  if (!derive_analytic_constants(a, lo)) throw NoContraction("certified_radius: no certified radius for this height");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (derive_analytic_constants(a, mid) ? lo : hi) = mid;
  }
  return lo;
}

PicardResult picard_analytic(double a, double r, const PicardOptions& opt) {
  if (opt.order < 4 || opt.order % 2 != 0) throw std::invalid_argument("picard_analytic: order must be even and >= 4");
  const auto constants = derive_analytic_constants(a, r);
  if (!constants) throw NoContraction("picard_analytic: no certified (R, L) for the requested (a, r)");

  PicardResult out;
  out.constants = *constants;
  Series h = Series::zero(opt.order, r);
  bool converged = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Series next = invert_L(nonlinear_Q(h, a, opt.order - 2));
    next.set_radius(r);
    const double step = weighted_norm(next - h, r);
    out.step_norms.push_back(step);
    h = std::move(next);
    out.iterations = it;
    if (step < opt.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence("picard_analytic: iteration limit reached");

  const double L = constants->L;
  out.aj_distance = weighted_norm(h + a * j_function(opt.order), r);
  out.aj_bound = L * a * r * std::exp(r * r / 2.0) / (2.0 * (1.0 - L));
  out.h = std::move(h);
  return out;
}

PicardResult picard_analytic(double a, const PicardOptions& opt, double r_cap) {
  return picard_analytic(a, certified_radius(a, r_cap), opt);
}

double find_x0(int order, double tol, double bracket_lo, double bracket_hi) {
  if (!(bracket_lo > 0.0 && bracket_hi > bracket_lo)) throw std::invalid_argument("find_x0: bad bracket");
  const Series J = j_function(order);

  // Tail past the truncation: successive terms shrink by at most x^2/(n+2).
  const double q = bracket_hi * bracket_hi / (order + 2);
  const double last = std::abs(J.coeff(order)) * std::pow(bracket_hi, order);
  if (!(q < 1.0) || last * q / (1.0 - q) > tol)
    throw std::invalid_argument("find_x0: truncation order too small for the bracket");

  if (J(bracket_hi) < 1.0) throw BracketFailure("find_x0: J(bracket_hi) < 1");
  if (J(bracket_lo) > 1.0) throw BracketFailure("find_x0: J(bracket_lo) > 1");

  double lo = bracket_lo, hi = bracket_hi;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (J(mid) < 1.0 ? lo : hi) = mid;
  }
  const double x0 = std::abs(J(lo) - 1.0) <= std::abs(J(hi) - 1.0) ? lo : hi;
  if (!(std::abs(J(x0) - 1.0) < tol)) throw NoConvergence("find_x0: residual above tolerance");
  return x0;
}

namespace {

constexpr int kKernelCells = 40;  // w in [0, 40]: e^{-80} is below double resolution
constexpr int kKernelNodes = 12;

}  // namespace

InverseT invert_T(const std::function<double(double)>& g, double x) {
  if (x < 0.0) throw std::invalid_argument("invert_T: x must be >= 0");
  const GaussRule& rule = gauss_legendre_cached(kKernelNodes);
  double i0 = 0.0, i1 = 0.0;
  for (int cell = 0; cell < kKernelCells; ++cell) {
    for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
      const double w = cell + 0.5 * (1.0 + rule.nodes(q));
      const double weight = 0.5 * rule.weights(q) * std::exp(-2.0 * w) * g(x * std::exp(-w));
      i0 += weight;
      i1 += weight * w;
    }
  }
  InverseT out;
  out.h = x * x * i1;
  out.hp = x * i0;
  out.hpp = g(x) - i0;
  return out;
}

namespace {

/// Degree-7 local Lagrange interpolation on a uniform grid over [0, r], extended evenly to x < 0.
class EvenGridInterpolant {
 public:
  EvenGridInterpolant(const std::vector<double>& values, double dx) : values_(values), dx_(dx) {}

  double operator()(double t) const {
    const int last = static_cast<int>(values_.size()) - 1;
    const double pos = std::abs(t) / dx_;
    int start = static_cast<int>(std::floor(pos)) - (kPoints / 2 - 1);
    start = std::min(start, last - (kPoints - 1));
    double sum = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      double basis = 1.0;
      for (int j = 0; j < kPoints; ++j)
        if (j != i) basis *= (pos - (start + j)) / static_cast<double>(i - j);
      sum += basis * values_[static_cast<std::size_t>(std::abs(start + i))];
    }
    return sum;
  }

 private:
  static constexpr int kPoints = 8;
  const std::vector<double>& values_;
  double dx_;
};

}  // namespace

C2OracleResult picard_c2_oracle(double a, double r, const C2OracleOptions& opt) {
  if (opt.grid < 16) throw std::invalid_argument("picard_c2_oracle: grid must have at least 16 cells");
  C2OracleResult out;
  out.certificate = contraction_certificate({a, r, 6.0 * a, 0.5, Flavor::C2});
  if (!out.certificate.certified) throw CertificateFailure("picard_c2_oracle: (a, r, 6a, 1/2) is not certified");

  const auto n = static_cast<std::size_t>(opt.grid) + 1;
  const double dx = r / opt.grid;
  std::vector<double> g(n, -a), h(n, 0.0), hp(n, 0.0), hpp(n, 0.0);
  const EvenGridInterpolant interp(g, dx);

  bool converged = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
    double change = 0.0;
    std::vector<double> hp_over_x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = dx * static_cast<double>(i);
      const InverseT inv = invert_T(interp, x);
      change = std::max(change, std::abs(inv.hpp - hpp[i]));
      h[i] = inv.h;
      hp[i] = inv.hp;
      hpp[i] = inv.hpp;
      hp_over_x[i] = g[i] - inv.hpp;
    }
    // P(h, a) = x h' - h - a + h'^2 [h'(x - 1/x) - h - a], with h'/x kept explicit.
    for (std::size_t i = 0; i < n; ++i) {
      const double x = dx * static_cast<double>(i);
      const double inner = hp_over_x[i] * (x * x - 1.0) - h[i] - a;
      g[i] = x * hp[i] - h[i] - a + hp[i] * hp[i] * inner;
    }
    out.iterations = it;
    if (change < opt.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence("picard_c2_oracle: iteration limit reached");

  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples.push_back({dx * static_cast<double>(i), a + h[i], hp[i], hpp[i]});
    out.hpp_sup = std::max(out.hpp_sup, std::abs(hpp[i]));
  }
  if (out.hpp_sup > 6.0 * a * (1.0 + 1e-12)) throw CertificateFailure("picard_c2_oracle: ||h''|| exceeds the certified ball");
  return out;
}

nlohmann::json series_to_json(const Series& s, double a) {
  std::vector<double> coeffs(s.coeffs().data(), s.coeffs().data() + s.coeffs().size());
  return {{"a", a}, {"r", s.radius()}, {"coeffs", coeffs}};
}

nlohmann::json certificate_to_json(const CertificateReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"inequality_id", c.inequality_id},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs},
                      {"slack", c.slack},
                      {"pass", c.pass}});
  }
  return checks;
}

}  // namespace lens
