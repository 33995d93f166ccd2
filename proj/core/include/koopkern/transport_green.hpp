#pragma once

// Green's-function and resolvent kernels for constant-speed advection
// c u' - lambda u, and a numerical check that the constructions agree.

#include "koopkern/quadrature.hpp"

#include <functional>
#include <string>
#include <vector>

namespace koopkern {

struct AdvectionProblem {
  double c = 1.0;
  double lambda = 1.0;
  double a = -30.0;
  double b = 30.0;
  /// Weight on [a, b]; empty means w = 1.
  std::function<double(double)> weight;

  [[nodiscard]] double w(double xi) const { return weight ? weight(xi) : 1.0; }
  [[nodiscard]] bool unit_weight() const noexcept { return !weight; }
  void validate() const;

  /// Lower limit a = x_min - 15 c / lambda so the truncated tail is e^{-30}.
  static AdvectionProblem truncated_for(double c, double lambda, double x_min, double x_max);
};

/// Decay transport f u' = -lambda u with constant f is advection with c = f.
[[nodiscard]] AdvectionProblem decay_transport(double f, double lambda, double a, double b);

/// H(x - xi) exp(-(lambda / c)(x - xi)) with H(0) = 1.
[[nodiscard]] double green_advection(const AdvectionProblem& p, double x, double xi);

/// Integral over [a, b] of G(x, s) G(y, s) w(s) ds. The rule q is mapped
/// onto the support [a, min(x, y)] of the integrand.
[[nodiscard]] double symmetrized_kernel(const AdvectionProblem& p, double x, double y,
                                        const QuadratureRule& q);

/// (1/|c|) exp(-alpha (y - x) / c) H((y - x) / c): the Laplace-weighted
/// delta along s_t(x) = x + c t resolved in closed form.
[[nodiscard]] double resolvent_kernel_advection(const AdvectionProblem& p, double x, double y,
                                                double alpha);

/// Integral over [a, b] of R(s, x) R(s, y) w(s) ds with R the resolvent
/// kernel at alpha.
[[nodiscard]] double symmetrized_resolvent(const AdvectionProblem& p, double x, double y,
                                           double alpha, const QuadratureRule& q);

/// (c / (2 lambda)) exp(-(lambda / c)|x - y|), the a -> -infinity limit of
/// the symmetrized kernel for w = 1 and c > 0.
[[nodiscard]] double analytic_advection_kernel(const AdvectionProblem& p, double x, double y);

struct UnificationRow {
  double x = 0.0;
  double y = 0.0;
  double k_green = 0.0;
  double k_analytic = 0.0;
  double k_resolvent_sym = 0.0;
  double rel_dev = 0.0;
};

struct UnificationReport {
  std::vector<UnificationRow> rows;
  double scale_green = 1.0;      ///< fitted s with s K_green ~ K_analytic
  double scale_resolvent = 1.0;  ///< fitted s with s K_res ~ K_analytic
  double max_rel_dev = 0.0;
  double max_diagonal_dev = 0.0;  ///< max |2 lambda K_green(x, x) / c - 1|
  double alpha = 0.0;
};

/// Compares the three kernels on all grid pairs after fitting one positive
/// scalar per constructed kernel against the closed form. Needs c > 0 and
/// w = 1.
[[nodiscard]] UnificationReport unification_check(const AdvectionProblem& p,
                                                  const std::vector<double>& grid,
                                                  const QuadratureRule& q);

}  // namespace koopkern
