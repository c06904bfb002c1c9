#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "lens/errors.hpp"

namespace lens {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

/// Adaptive step-size control shared by the graph and arclength integrators.
struct StepControl {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double initial_step = 1e-4;
  double max_step = 0.05;
  double min_step = 1e-14;
  long max_steps = 1'000'000;
};

/// Fourth-order continuous extension of one Dormand-Prince step.
template <int Dim>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Vec<Dim> r1, r2, r3, r4, r5;

  /// State at t in [t0, t0 + h].
  [[nodiscard]] Vec<Dim> operator()(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

template <int Dim>
struct RkStep {
  Vec<Dim> y;      ///< fifth-order solution at t + h
  Vec<Dim> error;  ///< embedded error estimate
  Vec<Dim> f_end;  ///< rhs at (t + h, y)
  DenseStep<Dim> dense;
};

namespace dopri5 {
// Butcher tableau of the Dormand-Prince 5(4) pair.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dopri5

/// One Dormand-Prince step of size h from (t, y) with f0 = rhs(t, y).
template <int Dim, class Rhs>
RkStep<Dim> dopri5_step(const Rhs& rhs, double t, const Vec<Dim>& y, const Vec<Dim>& f0, double h) {
  using namespace dopri5;
  const Vec<Dim> k2 = rhs(t + c2 * h, (y + h * (a21 * f0)).eval());
  const Vec<Dim> k3 = rhs(t + c3 * h, (y + h * (a31 * f0 + a32 * k2)).eval());
  const Vec<Dim> k4 = rhs(t + c4 * h, (y + h * (a41 * f0 + a42 * k2 + a43 * k3)).eval());
  const Vec<Dim> k5 = rhs(t + c5 * h, (y + h * (a51 * f0 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
  const Vec<Dim> k6 = rhs(t + h, (y + h * (a61 * f0 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());

  RkStep<Dim> out;
  out.y = y + h * (b1 * f0 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Vec<Dim> k7 = rhs(t + h, out.y);
  out.f_end = k7;
  out.error = h * (e1 * f0 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

  auto& d = out.dense;
  d.t0 = t;
  d.h = h;
  d.r1 = y;
  d.r2 = out.y - y;
  d.r3 = h * f0 - d.r2;
  d.r4 = d.r2 - h * k7 - d.r3;
  d.r5 = h * (d1 * f0 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  return out;
}

/// Scaled max-norm of the error estimate; <= 1 means the step is accepted.
template <int Dim>
double error_norm(const Vec<Dim>& err, const Vec<Dim>& y0, const Vec<Dim>& y1, const StepControl& ctl) {
  const auto scale = (ctl.abs_tol + ctl.rel_tol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
  return err.cwiseQuotient(scale).cwiseAbs().maxCoeff();
}

enum class StepAction { Continue, Stop };

struct IntegrationSummary {
  double t_end = 0.0;
  long accepted = 0;
  long rejected = 0;
  bool stopped_by_observer = false;
};

/**
 * Adaptive integration from t0 toward t_end (t_end > t0). After every accepted
 * step the observer is called as obs(step, t, y) and may modify y in place
 * (e.g. a projection) or return StepAction::Stop. The rhs is re-evaluated after
 * the observer so modifications are respected. `h` carries the step size in
 * and out so consecutive segments can resume.
 */
template <int Dim, class Rhs, class Observer>
IntegrationSummary integrate_adaptive(const Rhs& rhs, double t0, Vec<Dim>& y, double t_end, const StepControl& ctl,
                                      double& h, Observer&& obs) {
  IntegrationSummary sum;
  double t = t0;
  Vec<Dim> f = rhs(t, y);
  if (!(h > 0.0)) h = ctl.initial_step;
  long steps = 0;
  while (t < t_end) {
    if (++steps > ctl.max_steps) throw StepFailure("integrate_adaptive: step limit exceeded");
    h = std::min(h, ctl.max_step);
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }
    const RkStep<Dim> step = dopri5_step<Dim>(rhs, t, y, f, h);
    const double err = error_norm<Dim>(step.error, y, step.y, ctl);
    if (!std::isfinite(err)) {
      ++sum.rejected;
      h *= 0.2;
      if (h < ctl.min_step) throw StepFailure("integrate_adaptive: non-finite state");
      continue;
    }
    const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    if (err > 1.0) {
      ++sum.rejected;
      h *= std::min(factor, 0.9);
      if (h < ctl.min_step) throw StepFailure("integrate_adaptive: step size underflow");
      continue;
    }
    ++sum.accepted;
    const double h_used = h;
    t = last ? t_end : t + h_used;
    y = step.y;
    const StepAction action = obs(step, t, y);
    f = rhs(t, y);
    h = h_used * factor;
    if (action == StepAction::Stop) {
      sum.stopped_by_observer = true;
      break;
    }
  }
  sum.t_end = t;
  return sum;
}

}  // namespace lens
