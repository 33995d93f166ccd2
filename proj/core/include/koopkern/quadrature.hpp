#pragma once

#include <functional>
#include <vector>

namespace koopkern {

enum class QuadratureScheme { trapezoid, gauss_legendre };

[[nodiscard]] const char* to_string(QuadratureScheme s) noexcept;

/// Nodes and positive weights on [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = 0.0;
  double b = 1.0;
  QuadratureScheme scheme = QuadratureScheme::trapezoid;

  /// Composite trapezoid with n >= 2 equally spaced nodes.
  static QuadratureRule trapezoid(double a, double b, int n);
  /// `panels` equal panels with an `order`-point Gauss-Legendre rule each.
  static QuadratureRule gauss_legendre(double a, double b, int panels, int order);

  /// The same rule affinely mapped onto [lo, hi].
  [[nodiscard]] QuadratureRule mapped(double lo, double hi) const;

  [[nodiscard]] double integrate(const std::function<double(double)>& fn) const;
  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }

  /// Fewer than 2 nodes, non-positive weights or nodes outside [a, b] throw
  /// ContractViolation.
  void validate() const;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre_nodes(int order, std::vector<double>& nodes,
                          std::vector<double>& weights);

}  // namespace koopkern
