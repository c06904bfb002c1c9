#pragma once

#include <cmath>
#include <numbers>

namespace lens {

/// Point (x, f, f', f'') of the graph y = f(x).
struct ProfileSample {
  double x = 0.0;
  double f = 0.0;
  double fp = 0.0;
  double fpp = 0.0;
};

/// Running integrals carried along the curve from the axis.
struct CurveIntegrals {
  double s = 0.0;      ///< arclength
  double I_phi = 0.0;  ///< int e^{-rho^2/2} u'v'/u ds
  double I_v = 0.0;    ///< int e^{-rho^2/2} v ds
};

/**
 * Arclength state of the profile curve. `k` is the curvature -v'u'' + u'v''
 * evaluated from the equations of motion when the state was produced.
 */
struct CurveState {
  double s = 0.0;
  double u = 0.0;
  double v = 0.0;
  double up = 1.0;
  double vp = 0.0;
  double I_phi = 0.0;
  double I_v = 0.0;
  double k = 0.0;

  [[nodiscard]] double rho() const { return std::hypot(u, v); }
  /// Polar angle in [-pi/2, pi/2] on the half-plane u >= 0.
  [[nodiscard]] double theta() const { return std::atan2(v, u); }
  /// d theta / ds = (u v' - v u') / rho^2.
  [[nodiscard]] double theta_prime() const { return (u * vp - v * up) / (u * u + v * v); }
  /// d rho / ds.
  [[nodiscard]] double rho_prime() const { return (u * up + v * vp) / rho(); }
  /// gamma/|gamma| . nu with nu the counterclockwise normal.
  [[nodiscard]] double normal_transversality() const { return (-u * vp + v * up) / rho(); }
};

inline const double kSqrt2 = std::numbers::sqrt2;

}  // namespace lens
