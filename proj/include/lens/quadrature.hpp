#pragma once

#include <Eigen/Core>

namespace lens {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the Legendre recurrence.
GaussRule gauss_legendre(int n);

/// Cached rule of the given size; thread-safe.
const GaussRule& gauss_legendre_cached(int n);

/// int_lo^hi f with one n-point rule.
template <class F>
double integrate_gauss(F&& f, double lo, double hi, int n = 16) {
  const GaussRule& g = gauss_legendre_cached(n);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < g.nodes.size(); ++i) sum += g.weights(i) * f(mid + half * g.nodes(i));
  return half * sum;
}

}  // namespace lens
