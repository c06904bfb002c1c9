#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <cmath>
#include <random>

#include "lens/even_series.hpp"

using lens::EvenSeries;
using Series = EvenSeries<double>;

namespace {

Series poly(std::initializer_list<double> even_coeffs, double r = 1.0) {
  Series::Coeffs c(static_cast<Eigen::Index>(even_coeffs.size()));
  Eigen::Index i = 0;
  for (double v : even_coeffs) c(i++) = v;
  return Series(c, r);
}

// Random even polynomial of degree 2*terms-2 with coefficients in [-1, 1].
Series random_poly(std::mt19937_64& rng, int max_terms) {
  std::uniform_int_distribution<int> terms(1, max_terms);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Series::Coeffs c(terms(rng));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = coef(rng);
  return Series(c);
}

// Direct coefficient recursion for the kernel element, independent of the library.
std::vector<long double> eta_reference(int order) {
  std::vector<long double> eta(order / 2 + 1);
  eta[0] = 1.0L;
  for (int n = 0; n + 2 <= order; n += 2) eta[(n + 2) / 2] = (n - 1) * eta[n / 2] / ((n + 2.0L) * (n + 2.0L));
  return eta;
}

}  // namespace

TEST_CASE("eta coefficients") {
  CHECK(lens::eta_coefficients<double>(0).coeff(0) == 1.0);
  const Series eta = lens::eta_coefficients<double>(40);
  CHECK(eta.coeff(2) == doctest::Approx(-0.25).epsilon(1e-16));
  CHECK(eta.coeff(4) == doctest::Approx(-1.0 / 64).epsilon(1e-16));
  const auto ref = eta_reference(40);
  for (int n = 2; n <= 40; n += 2) {
    CHECK(eta.coeff(n) < 0.0);
    CHECK(eta.coeff(n) == doctest::Approx(static_cast<double>(ref[n / 2])).epsilon(1e-15));
  }
  CHECK(eta.coeff(3) == 0.0);
}

TEST_CASE("J function") {
  const Series J = lens::j_function<double>(60);
  CHECK(J.coeff(0) == 0.0);
  CHECK(J(0.0) == 0.0);
  CHECK(J.derivative(0.0) == 0.0);
  CHECK(J.second_derivative(0.0) == doctest::Approx(0.5));
  for (int n = 2; n <= 60; n += 2) CHECK(J.coeff(n) > 0.0);

  // Reference norm at r = 1 from the independent recursion.
  const auto ref = eta_reference(60);
  long double norm = 0.0L;
  for (int n = 2; n <= 60; n += 2) norm += std::fabs(ref[n / 2]) * n;
  CHECK(lens::weighted_norm(J, 1.0) == doctest::Approx(static_cast<double>(norm)).epsilon(1e-14));
  CHECK(lens::weighted_norm(J, 1.0) <= 0.8244);
  CHECK_THROWS_AS(lens::j_function<double>(0), std::invalid_argument);
}

TEST_CASE("weighted norm") {
  CHECK(lens::weighted_norm(poly({3.0}), 2.0) == doctest::Approx(1.5));  // constant term carries 1/r
  CHECK(lens::weighted_norm(poly({-3.0}), 0.5) == doctest::Approx(6.0));
  CHECK(lens::weighted_norm(poly({0.0, 1.0}), 2.0) == doctest::Approx(4.0));
  CHECK(lens::weighted_norm(poly({0.0, 0.0, -2.0}), 1.5) == doctest::Approx(2.0 * 4 * std::pow(1.5, 3)));
  CHECK_THROWS_AS(lens::weighted_norm(poly({1.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lens::weighted_norm(poly({1.0}), -1.0), std::invalid_argument);

  const Series eta = lens::eta_coefficients<double>(30);
  const Series J = lens::j_function<double>(30);
  for (double r : {0.5, 1.0, 2.0})
    CHECK(lens::weighted_norm(eta - Series::constant(1.0), r) == doctest::Approx(lens::weighted_norm(J, r)));

  double prev = 0.0;
  for (int order = 0; order <= 30; order += 2) {
    const double n = lens::weighted_norm(J.truncated(order), 1.3);
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("apply_L and invert_L on known inputs") {
  const Series l = lens::apply_L(poly({0.0, 1.0, 0.0}));
  CHECK(l.coeff(0) == 4.0);
  CHECK(l.coeff(2) == -1.0);
  CHECK_THROWS_AS(lens::apply_L(poly({1.0})), std::invalid_argument);

  const Series inv = lens::invert_L(poly({4.0, -1.0}));
  CHECK(inv.coeff(0) == 0.0);
  CHECK(inv.coeff(2) == doctest::Approx(1.0));
  CHECK(inv.coeff(4) == doctest::Approx(0.0));
  CHECK(inv.coeff(6) == doctest::Approx(0.0));

  const Series zero = lens::invert_L(Series::zero(10));
  CHECK(zero.coeffs().cwiseAbs().maxCoeff() == 0.0);

  const Series J = lens::j_function<double>(30);
  const Series one_inv = lens::invert_L(Series::constant(1.0, 28));
  for (int n = 0; n <= 30; n += 2) CHECK(one_inv.coeff(n) == doctest::Approx(J.coeff(n)).epsilon(1e-15));
}

TEST_CASE("kernel and particular solution at truncations 10 to 60") {
  for (int order = 10; order <= 60; order += 10) {
    const Series Leta = lens::apply_L(lens::eta_coefficients<double>(order));
    const Series LJ = lens::apply_L(lens::j_function<double>(order));
    CHECK(Leta.coeffs().cwiseAbs().maxCoeff() < 1e-15);
    CHECK(LJ.coeff(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(LJ.coeffs().tail(LJ.coeffs().size() - 1).cwiseAbs().maxCoeff() < 1e-15);
    const Series J = lens::j_function<double>(order);
    for (double r : {0.5, 1.0, 2.0}) CHECK(lens::weighted_norm(J, r) <= 0.5 * r * std::exp(0.5 * r * r));
  }
}

TEST_CASE("apply_G") {
  const Series g = lens::apply_G(poly({1.0, 1.0, 1.0}));
  CHECK(g.coeff(0) == doctest::Approx(0.5));
  CHECK(g.coeff(2) == doctest::Approx(1.0 / 8));
  CHECK(g.coeff(4) == doctest::Approx(1.0 / 24));
}

TEST_CASE("nonlinear Q") {
  const Series q0 = lens::nonlinear_Q(Series::zero(10), 0.7);
  CHECK(q0.coeff(0) == doctest::Approx(-0.7));
  CHECK(q0.coeffs().tail(q0.coeffs().size() - 1).cwiseAbs().maxCoeff() == 0.0);

  const Series q = lens::nonlinear_Q(poly({0.0, 1.0}), 1.0);
  CHECK(q.coeff(0) == doctest::Approx(-1.0));
  CHECK(q.coeff(2) == doctest::Approx(-12.0));
  CHECK(q.coeff(4) == doctest::Approx(4.0));
  for (int n = 6; n <= q.order(); n += 2) CHECK(q.coeff(n) == doctest::Approx(0.0));

  CHECK_THROWS_AS(lens::nonlinear_Q(poly({0.1, 1.0}), 1.0), std::invalid_argument);

  // Pointwise oracle: -a + (x - 1/x) h'^3 - h'^2 (h + a) on random polynomials.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    Series h = random_poly(rng, 6);
    h.coeffs()(0) = 0.0;
    const double a = 0.3 + 0.1 * trial;
    const Series Q = lens::nonlinear_Q(h, a);
    for (double x : {0.1, 0.37, 0.8}) {
      const double hp = h.derivative(x);
      const double direct = -a + (x - 1.0 / x) * hp * hp * hp - hp * hp * (h(x) + a);
      CHECK(Q(x) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(Q(-x) == Q(x));
    }
  }
}

TEST_CASE("series arithmetic and evaluation") {
  const Series f = poly({1.0, 2.0, 3.0});
  CHECK(f(0.5) == doctest::Approx(1 + 2 * 0.25 + 3 * 0.0625));
  CHECK(f(-0.5) == f(0.5));
  CHECK(f.derivative(0.5) == doctest::Approx(4 * 0.5 + 12 * 0.125));
  CHECK(f.derivative_over_x(0.5) == doctest::Approx(4 + 12 * 0.25));
  CHECK(f.second_derivative(0.5) == doctest::Approx(4 + 36 * 0.25));
  const Series sum = f + poly({0.0, 0.0, 0.0, 1.0});
  CHECK(sum.order() == 6);
  CHECK(sum.coeff(6) == 1.0);
  const Series prod = lens::multiply(f, f, 4);
  CHECK(prod.coeff(4) == doctest::Approx(2 * 3 + 2 * 2));
  CHECK(lens::times_x2(f, 6).coeff(6) == 3.0);
  CHECK(lens::derivative_over_x(f).coeff(2) == 12.0);
  CHECK_THROWS_AS(Series::zero(3), std::invalid_argument);
  CHECK_THROWS_AS(Series::monomial(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Series(Series::Coeffs::Ones(2), 0.0), std::invalid_argument);
}

TEST_CASE("apply_L of invert_L is the identity in exact rational arithmetic") {
  using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                                 boost::multiprecision::et_off>;
  using RSeries = EvenSeries<Rational>;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 30);
  for (int order = 0; order <= 20; order += 2) {
    RSeries::Coeffs c(order / 2 + 1);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = Rational(num(rng)) / Rational(den(rng));
    const RSeries g(c);
    const RSeries back = lens::apply_L(lens::invert_L(g));
    REQUIRE(back.order() == g.order());
    for (int n = 0; n <= order; n += 2) CHECK(back.coeff(n) == g.coeff(n));
  }
  // Exact kernel and particular solution.
  const RSeries LJ = lens::apply_L(lens::j_function<Rational>(20));
  CHECK(LJ.coeff(0) == Rational(1));
  for (int n = 2; n <= 18; n += 2) CHECK(LJ.coeff(n) == Rational(0));
  CHECK(lens::eta_coefficients<Rational>(4).coeff(4) == Rational(-1) / Rational(64));
}

TEST_CASE("apply_L of invert_L in floating point") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Series g = random_poly(rng, 30);
    const Series back = lens::apply_L(lens::invert_L(g));
    const double scale = std::max(1.0, g.coeffs().cwiseAbs().maxCoeff());
    CHECK((back.coeffs() - g.coeffs()).cwiseAbs().maxCoeff() / scale < 1e-13);
  }
}

TEST_CASE("property: inverse norm bound on random polynomials") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Series g = random_poly(rng, 12);
    const Series h = lens::invert_L(g);
    for (double r : {0.5, 1.0, 2.0}) {
      const double lhs = lens::weighted_norm(h, r);
      const double rhs = r * r * std::exp(0.5 * r * r) * lens::weighted_norm(lens::apply_G(g), r);
      CHECK(lhs <= rhs * (1.0 + 1e-14));
    }
  }
}

TEST_CASE("property: every produced series is even") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    Series h = random_poly(rng, 8);
    h.coeffs()(0) = 0.0;
    const Series q = lens::nonlinear_Q(h, 1.0);
    const Series inv = lens::invert_L(q);
    for (double x : {0.2, 0.45, 0.9}) {
      CHECK(q(-x) == q(x));
      CHECK(inv(-x) == inv(x));
      CHECK(inv.derivative(-x) == -inv.derivative(x));
    }
  }
}
