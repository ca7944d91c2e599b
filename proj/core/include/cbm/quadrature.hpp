#pragma once

#include <cstddef>
#include <vector>

namespace cbm {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Rule with n >= 1 points; computed once per n and cached. Thread-safe.
const GaussLegendreRule& gauss_legendre(std::size_t n);

/// Integrates f over [a, b] with the n-point rule.
template <class F>
double integrate(F&& f, double a, double b, std::size_t n) {
  const GaussLegendreRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return acc * half;
}

}  // namespace cbm
