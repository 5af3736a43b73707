#ifndef FYVI_QUADRATURE_HPP
#define FYVI_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace fyvi {

/// Gauss-Legendre rule on [-1, 1]. Nodes are ascending.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Computes an n-point rule by Newton iteration on P_n. Throws
  /// std::invalid_argument for n == 0.
  explicit GaussLegendre(std::size_t n);

  /// Integral of f over [a, b].
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }
};

/// Shared, lazily built rules. Thread-safe; the returned reference is stable.
const GaussLegendre& gauss_legendre(std::size_t n);

}  // namespace fyvi

#endif  // FYVI_QUADRATURE_HPP
