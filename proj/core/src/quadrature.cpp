#include "koopkern/quadrature.hpp"

#include "koopkern/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace koopkern {

const char* to_string(QuadratureScheme s) noexcept {
  return s == QuadratureScheme::trapezoid ? "trapezoid" : "gauss_legendre";
}

void gauss_legendre_nodes(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw ContractViolation("gauss_legendre: order must be >= 1");
  const auto n = static_cast<std::size_t>(order);
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  if (n == 1) {
    weights[0] = 2.0;
    return;
  }
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

QuadratureRule QuadratureRule::trapezoid(double a, double b, int n) {
  if (n < 2) throw ContractViolation(fmt::format("trapezoid: need >= 2 nodes, got {}", n));
  if (!(a < b)) throw ContractViolation("trapezoid: need a < b");
  QuadratureRule q;
  q.a = a;
  q.b = b;
  q.scheme = QuadratureScheme::trapezoid;
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) {
    q.nodes.push_back(i == n - 1 ? b : a + i * h);
    q.weights.push_back(i == 0 || i == n - 1 ? 0.5 * h : h);
  }
  return q;
}

QuadratureRule QuadratureRule::gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw ContractViolation("gauss_legendre: need >= 1 panel");
  if (panels * order < 2)
    throw ContractViolation("gauss_legendre: need >= 2 nodes in total");
  if (!(a < b)) throw ContractViolation("gauss_legendre: need a < b");
  std::vector<double> x, w;
  gauss_legendre_nodes(order, x, w);
  QuadratureRule q;
  q.a = a;
  q.b = b;
  q.scheme = QuadratureScheme::gauss_legendre;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t k = 0; k < x.size(); ++k) {
      q.nodes.push_back(lo + 0.5 * h * (x[k] + 1.0));
      q.weights.push_back(0.5 * h * w[k]);
    }
  }
  return q;
}

QuadratureRule QuadratureRule::mapped(double lo, double hi) const {
  if (!(lo < hi)) throw ContractViolation("QuadratureRule::mapped: need lo < hi");
  const double s = (hi - lo) / (b - a);
  QuadratureRule q = *this;
  q.a = lo;
  q.b = hi;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    q.nodes[i] = lo + (nodes[i] - a) * s;
    q.weights[i] = weights[i] * s;
  }
  return q;
}

double QuadratureRule::integrate(const std::function<double(double)>& fn) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * fn(nodes[i]);
  return sum;
}

void QuadratureRule::validate() const {
  if (nodes.size() < 2 || nodes.size() != weights.size())
    throw ContractViolation(fmt::format("quadrature: invalid rule with {} nodes", nodes.size()));
  if (!(a < b)) throw ContractViolation("quadrature: need a < b");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(weights[i] > 0.0)) throw ContractViolation("quadrature: weights must be positive");
    if (nodes[i] < a || nodes[i] > b) throw ContractViolation("quadrature: node outside [a, b]");
  }
}

}  // namespace koopkern
