#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lens/even_series.hpp"
#include "lens/types.hpp"

namespace lens {

using Series = EvenSeries<double>;

enum class Flavor { C2, Analytic };

/// Constants (a, r, R, L) of a contraction argument for the degenerate Cauchy problem.
struct ContractionConstants {
  double a = 0.0;
  double r = 0.0;
  double R = 0.0;
  double L = 0.5;
  Flavor flavor = Flavor::Analytic;
};

struct InequalityCheck {
  std::string inequality_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
  bool pass = false;
  bool sufficient_only = false;  ///< sufficient-condition check; not part of the verdict
};

struct CertificateReport {
  ContractionConstants constants;
  bool certified = false;
  std::vector<InequalityCheck> checks;
};

/// Absolute margin every certified inequality must clear.
inline constexpr double kCertificateMargin = 1e-12;

/// Constants of the sufficient regime condition: C_r and K_r.
double regime_C(double r);
double regime_K(double r);

/**
 * Evaluates the self-map and contraction inequalities of the requested
 * flavor in plain double arithmetic. For the analytic flavor the regime
 * sufficient condition R <= C_r sqrt(L), a <= K_r R is reported alongside.
 */
CertificateReport contraction_certificate(const ContractionConstants& c);

/// Radius and ball size that certify the C2 argument for every a > 0 with L = 1/2.
ContractionConstants lwp_constants(double a);

/// Smallest-ball analytic constants for (a, r), or nullopt when no (R, L) certifies.
std::optional<ContractionConstants> derive_analytic_constants(double a, double r);

/// Largest r (up to r_max) at which derive_analytic_constants succeeds.
double certified_radius(double a, double r_max = 20.0);

struct PicardOptions {
  int order = 64;
  double tol = 1e-14;
  int max_iter = 200;
};

struct PicardResult {
  Series h;                        ///< fixed point, radius() = r
  ContractionConstants constants;  ///< certified constants used
  int iterations = 0;
  std::vector<double> step_norms;  ///< ||h_{k+1} - h_k||_r
  double aj_distance = 0.0;        ///< ||h + aJ||_r
  double aj_bound = 0.0;           ///< L a r e^{r^2/2} / (2(1-L))
};

/// Fixed point of h -> L^{-1} Q(h, a) started at h = 0, in the weighted norm at radius r.
PicardResult picard_analytic(double a, double r, const PicardOptions& opt = {});

/// Picard with the radius chosen as min(certified_radius(a), r_cap).
PicardResult picard_analytic(double a, const PicardOptions& opt = {}, double r_cap = 0.5);

/// Positive root of J(x) = 1, by bisection on [bracket_lo, bracket_hi].
double find_x0(int order = 64, double tol = 1e-15, double bracket_lo = 1.0, double bracket_hi = 3.0);

/// h, h', h'' of T^{-1} g at x, where T h = h'' + h'/x with h(0) = h'(0) = 0.
struct InverseT {
  double h = 0.0;
  double hp = 0.0;
  double hpp = 0.0;
};

/**
 * T^{-1} g(x) = int_0^x (log x - log t) t g(t) dt via t = x e^{-w}:
 * h = x^2 int_0^inf w e^{-2w} g(x e^{-w}) dw, composite Gauss-Legendre in w.
 */
InverseT invert_T(const std::function<double(double)>& g, double x);

struct C2OracleOptions {
  int grid = 256;
  double tol = 1e-14;
  int max_iter = 200;
};

struct C2OracleResult {
  std::vector<ProfileSample> samples;  ///< (x, a + h, h', h'') on the uniform grid
  int iterations = 0;
  double hpp_sup = 0.0;  ///< ||h''||_inf
  CertificateReport certificate;
};

/// Independent C^2 solution of the degenerate problem by iterating h -> T^{-1} P(h, a) on a grid.
C2OracleResult picard_c2_oracle(double a, double r, const C2OracleOptions& opt = {});

nlohmann::json series_to_json(const Series& s, double a);
nlohmann::json certificate_to_json(const CertificateReport& report);

}  // namespace lens
