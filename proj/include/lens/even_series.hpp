#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace lens {

/**
 * Even power series f(x) = sum_k c_k x^{2k}, truncated at degree order().
 *
 * Only even-degree coefficients are stored; odd ones are structurally zero.
 * The scalar type is a template parameter so the operator identities can be
 * checked in exact rational arithmetic as well as in double.
 */
template <typename Scalar>
class EvenSeries {
 public:
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  EvenSeries() : coeffs_(Coeffs::Zero(1)) {}
  explicit EvenSeries(Coeffs even_coeffs, double radius = 1.0)
      : coeffs_(std::move(even_coeffs)), radius_(radius) {
    if (coeffs_.size() == 0) coeffs_ = Coeffs::Zero(1);
    if (!(radius_ > 0.0)) throw std::invalid_argument("EvenSeries: radius must be positive");
  }

  static EvenSeries zero(int order, double radius = 1.0) {
    return EvenSeries(Coeffs::Zero(half(order) + 1), radius);
  }
  static EvenSeries constant(const Scalar& c, int order = 0, double radius = 1.0) {
    EvenSeries s = zero(order, radius);
    s.coeffs_(0) = c;
    return s;
  }
  /// c * x^degree, stored up to `order` (at least `degree`).
  static EvenSeries monomial(int degree, const Scalar& c, int order = -1, double radius = 1.0) {
    if (degree < 0 || degree % 2 != 0) throw std::invalid_argument("EvenSeries: monomial degree must be even and >= 0");
    EvenSeries s = zero(std::max(order, degree), radius);
    s.coeffs_(degree / 2) = c;
    return s;
  }

  [[nodiscard]] int order() const { return 2 * (static_cast<int>(coeffs_.size()) - 1); }
  [[nodiscard]] double radius() const { return radius_; }
  [[nodiscard]] const Coeffs& coeffs() const { return coeffs_; }
  Coeffs& coeffs() { return coeffs_; }
  void set_radius(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("EvenSeries: radius must be positive");
    radius_ = r;
  }

  /// Coefficient of x^degree (zero for odd degrees and past the truncation).
  [[nodiscard]] Scalar coeff(int degree) const {
    if (degree < 0 || degree % 2 != 0 || degree > order()) return Scalar(0);
    return coeffs_(degree / 2);
  }

  [[nodiscard]] EvenSeries truncated(int new_order) const {
    EvenSeries out = zero(new_order, radius_);
    const auto n = std::min(out.coeffs_.size(), coeffs_.size());
    out.coeffs_.head(n) = coeffs_.head(n);
    return out;
  }

  /// Horner evaluation in x^2.
  [[nodiscard]] Scalar operator()(const Scalar& x) const {
    const Scalar x2 = x * x;
    Scalar acc(0);
    for (auto k = coeffs_.size(); k-- > 0;) acc = acc * x2 + coeffs_(k);
    return acc;
  }

  /// f'(x) = sum 2k c_k x^{2k-1}.
  [[nodiscard]] Scalar derivative(const Scalar& x) const { return x * derivative_over_x(x); }

  /// f'(x)/x, regular at x = 0.
  [[nodiscard]] Scalar derivative_over_x(const Scalar& x) const {
    const Scalar x2 = x * x;
    Scalar acc(0);
    for (auto k = coeffs_.size(); k-- > 1;) acc = acc * x2 + Scalar(2 * static_cast<int>(k)) * coeffs_(k);
    return acc;
  }

  /// f''(x) = sum 2k(2k-1) c_k x^{2k-2}.
  [[nodiscard]] Scalar second_derivative(const Scalar& x) const {
    const Scalar x2 = x * x;
    Scalar acc(0);
    for (auto k = coeffs_.size(); k-- > 1;) {
      const int n = 2 * static_cast<int>(k);
      acc = acc * x2 + Scalar(n * (n - 1)) * coeffs_(k);
    }
    return acc;
  }

  EvenSeries& operator+=(const EvenSeries& o) {
    grow(o.order());
    coeffs_.head(o.coeffs_.size()) += o.coeffs_;
    return *this;
  }
  EvenSeries& operator-=(const EvenSeries& o) {
    grow(o.order());
    coeffs_.head(o.coeffs_.size()) -= o.coeffs_;
    return *this;
  }
  EvenSeries& operator*=(const Scalar& c) {
    coeffs_ *= c;
    return *this;
  }

  friend EvenSeries operator+(EvenSeries a, const EvenSeries& b) { return a += b; }
  friend EvenSeries operator-(EvenSeries a, const EvenSeries& b) { return a -= b; }
  friend EvenSeries operator*(EvenSeries a, const Scalar& c) { return a *= c; }
  friend EvenSeries operator*(const Scalar& c, EvenSeries a) { return a *= c; }
  friend EvenSeries operator-(EvenSeries a) { return a *= Scalar(-1); }

 private:
  static int half(int order) {
    if (order < 0 || order % 2 != 0) throw std::invalid_argument("EvenSeries: order must be even and >= 0");
    return order / 2;
  }
  void grow(int new_order) {
    if (new_order <= order()) return;
    Coeffs c = Coeffs::Zero(half(new_order) + 1);
    c.head(coeffs_.size()) = coeffs_;
    coeffs_ = std::move(c);
  }

  Coeffs coeffs_;
  double radius_ = 1.0;
};

/// Truncated Cauchy product, kept up to degree `order`.
template <typename Scalar>
EvenSeries<Scalar> multiply(const EvenSeries<Scalar>& f, const EvenSeries<Scalar>& g, int order) {
  auto out = EvenSeries<Scalar>::zero(order, f.radius());
  const Eigen::Index nf = f.coeffs().size(), ng = g.coeffs().size(), no = out.coeffs().size();
  for (Eigen::Index i = 0; i < std::min(nf, no); ++i) {
    if (f.coeffs()(i) == Scalar(0)) continue;
    for (Eigen::Index j = 0; j < ng && i + j < no; ++j) out.coeffs()(i + j) += f.coeffs()(i) * g.coeffs()(j);
  }
  return out;
}

/// x^2 * f, kept up to degree `order`.
template <typename Scalar>
EvenSeries<Scalar> times_x2(const EvenSeries<Scalar>& f, int order) {
  auto out = EvenSeries<Scalar>::zero(order, f.radius());
  const Eigen::Index n = std::min(f.coeffs().size(), out.coeffs().size() - 1);
  out.coeffs().segment(1, n) = f.coeffs().head(n);
  return out;
}

/// f'(x)/x as an even series; exact index shift, no division near 0.
template <typename Scalar>
EvenSeries<Scalar> derivative_over_x(const EvenSeries<Scalar>& f) {
  const int order = std::max(0, f.order() - 2);
  auto out = EvenSeries<Scalar>::zero(order, f.radius());
  for (Eigen::Index k = 1; k < f.coeffs().size(); ++k) out.coeffs()(k - 1) = Scalar(2 * static_cast<int>(k)) * f.coeffs()(k);
  return out;
}

/// <n> := max(1, n).
constexpr int bracket_weight(int n) { return n > 1 ? n : 1; }

/// ||f||_r = sum |f_n| <n> r^{n-1}; the n = 0 term carries the factor 1/r.
template <typename Scalar>
double weighted_norm(const EvenSeries<Scalar>& f, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("weighted_norm: r must be positive");
  using std::abs;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < f.coeffs().size(); ++k) {
    const int n = 2 * static_cast<int>(k);
    sum += static_cast<double>(abs(f.coeffs()(k))) * bracket_weight(n) * std::pow(r, n - 1);
  }
  return sum;
}

template <typename Scalar>
double weighted_norm(const EvenSeries<Scalar>& f) {
  return weighted_norm(f, f.radius());
}

/// Linearised operator: (Lf)_n = (n+2)^2 f_{n+2} - (n-1) f_n; the output loses two degrees.
template <typename Scalar>
EvenSeries<Scalar> apply_L(const EvenSeries<Scalar>& f) {
  if (f.order() < 2) throw std::invalid_argument("apply_L: series order must be >= 2");
  auto out = EvenSeries<Scalar>::zero(f.order() - 2, f.radius());
  for (Eigen::Index k = 0; k < out.coeffs().size(); ++k) {
    const int n = 2 * static_cast<int>(k);
    out.coeffs()(k) = Scalar((n + 2) * (n + 2)) * f.coeffs()(k + 1) - Scalar(n - 1) * f.coeffs()(k);
  }
  return out;
}

/**
 * Unique h with h(0) = 0 and Lh = g, by the two-term recursion
 * (n+2)^2 h_{n+2} = g_n + (n-1) h_n. The output gains two degrees.
 */
template <typename Scalar>
EvenSeries<Scalar> invert_L(const EvenSeries<Scalar>& g) {
  auto h = EvenSeries<Scalar>::zero(g.order() + 2, g.radius());
  for (Eigen::Index k = 0; k < g.coeffs().size(); ++k) {
    const int n = 2 * static_cast<int>(k);
    h.coeffs()(k + 1) = (g.coeffs()(k) + Scalar(n - 1) * h.coeffs()(k)) / Scalar((n + 2) * (n + 2));
  }
  return h;
}

/// (Gg)_n = g_n / ((n+2)<n>).
template <typename Scalar>
EvenSeries<Scalar> apply_G(const EvenSeries<Scalar>& g) {
  auto out = g;
  for (Eigen::Index k = 0; k < out.coeffs().size(); ++k) {
    const int n = 2 * static_cast<int>(k);
    out.coeffs()(k) /= Scalar((n + 2) * bracket_weight(n));
  }
  return out;
}

/// Kernel element of L: eta_0 = 1, eta_{n+2} = (n-1) eta_n / (n+2)^2.
template <typename Scalar = double>
EvenSeries<Scalar> eta_coefficients(int order) {
  auto eta = EvenSeries<Scalar>::zero(order);
  eta.coeffs()(0) = Scalar(1);
  for (Eigen::Index k = 0; k + 1 < eta.coeffs().size(); ++k) {
    const int n = 2 * static_cast<int>(k);
    eta.coeffs()(k + 1) = Scalar(n - 1) * eta.coeffs()(k) / Scalar((n + 2) * (n + 2));
  }
  return eta;
}

/// J = 1 - eta, the particular solution of LJ = 1 with J(0) = J'(0) = 0.
template <typename Scalar = double>
EvenSeries<Scalar> j_function(int order) {
  if (order < 2) throw std::invalid_argument("j_function: order must be >= 2");
  auto j = -eta_coefficients<Scalar>(order);
  j.coeffs()(0) = Scalar(0);
  return j;
}

/**
 * Q(h, a) = -a + (x - 1/x) h'^3 - h'^2 (h + a), written through p = h'/x as
 * -a + x^2 (x^2 - 1) p^3 - x^2 p^2 (h + a). Requires h(0) = 0.
 * `order < 0` keeps the exact degree 3*order(h) - 2.
 */
template <typename Scalar>
EvenSeries<Scalar> nonlinear_Q(const EvenSeries<Scalar>& h, const Scalar& a, int order = -1) {
  if (h.coeffs()(0) != Scalar(0)) throw std::invalid_argument("nonlinear_Q: h must vanish at the origin");
  if (order < 0) order = std::max(0, 3 * h.order() - 2);
  const auto p = derivative_over_x(h);
  const auto p2 = multiply(p, p, order);
  const auto p3 = multiply(p2, p, order);
  auto h_plus_a = h;
  h_plus_a.coeffs()(0) += a;

  // x^2 (x^2 - 1) p^3
  auto cubic = times_x2(times_x2(p3, order), order) - times_x2(p3, order);
  auto quad = times_x2(multiply(p2, h_plus_a, order), order);
  auto q = cubic - quad;
  q = q.truncated(order);
  q.coeffs()(0) -= a;
  return q;
}

}  // namespace lens
