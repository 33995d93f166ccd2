#pragma once

// Truncated path-integral coordinate xi along the flow and the rank-one
// characteristic kernel K(x, y) = xi(x) xi(y).

#include "koopkern/dynamics.hpp"
#include "koopkern/kernel_bank.hpp"

namespace koopkern {

struct PathIntegralConfig {
  double lambda = 0.0;
  Vec w;  ///< left eigenvector for lambda
  double horizon = 10.0;
  int steps = 2000;
  /// forward for lambda > 0, backward for lambda < 0.
  Direction direction = Direction::forward;
  double escape_radius = 1e6;

  [[nodiscard]] double dt() const noexcept { return horizon / steps; }
  /// Signed step: +dt forward, -dt backward.
  [[nodiscard]] double signed_dt() const noexcept {
    return direction == Direction::forward ? dt() : -dt();
  }
  void validate() const;
};

/// Picks w and the integration direction for an eigenvalue of lin.
/// lambda = 0 is a ContractViolation; a lambda that is not in the spectrum
/// (tolerance 1e-9) throws UnknownEigenvalue.
[[nodiscard]] PathIntegralConfig mode_kernel_select(
    const LinearizationInfo& lin, double lambda, double horizon = 10.0,
    int steps = 2000, double escape_radius = 1e6);

class XiEvaluator {
 public:
  XiEvaluator(SystemPtr sys, PathIntegralConfig cfg);
  XiEvaluator(SystemPtr sys, LinearizationInfo lin, PathIntegralConfig cfg);

  [[nodiscard]] const SystemDef& system() const noexcept { return *sys_; }
  [[nodiscard]] const SystemPtr& system_ptr() const noexcept { return sys_; }
  [[nodiscard]] const PathIntegralConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const LinearizationInfo& linearization() const noexcept {
    return lin_;
  }

  /// xi_T(x) = w.(x - x*) + sum_k e^{-lambda (t_k + h/2)} w.F((x_k + x_{k+1})/2) h
  /// with signed step h and F the nonlinear part. Throws BlowUp.
  [[nodiscard]] double value(const Vec& x) const;
  [[nodiscard]] Vec values(const Points& xs) const;

  /// Central differences of value().
  [[nodiscard]] Vec gradient(const Vec& x, double h = 1e-5) const;

  /// f(x).grad xi_T(x) - lambda xi_T(x) with a finite-difference gradient.
  [[nodiscard]] double koopman_residual(const Vec& x, double fd_step = 1e-5) const;

  /// Closed form of the same residual for the continuous-time integral:
  /// e^{-lambda tau} w.F(s_tau(x)), tau = +-T.
  [[nodiscard]] double predicted_residual(const Vec& x) const;

 private:
  SystemPtr sys_;
  LinearizationInfo lin_;
  PathIntegralConfig cfg_;
};

using XiPtr = std::shared_ptr<const XiEvaluator>;

/// Free-function spelling of XiEvaluator::value.
[[nodiscard]] inline double xi_truncated(const XiEvaluator& ev, const Vec& x) {
  return ev.value(x);
}
[[nodiscard]] inline double koopman_residual_T(const XiEvaluator& ev,
                                               const Vec& x, double fd_step) {
  return ev.koopman_residual(x, fd_step);
}

/// K(x, y) = xi(x) xi(y); gradient xi(y) grad xi(x) by central differences.
[[nodiscard]] KernelSpec rank_one_kernel(XiPtr ev, double fd_step = 1e-5);

/// Experimental: (K_plus + K_minus) / 2 over two modes of the same system.
[[nodiscard]] KernelMixture experimental_sum_kernel(XiPtr plus, XiPtr minus);

}  // namespace koopkern
