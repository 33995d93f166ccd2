#pragma once

// Multiple kernel learning: simplex weights beta over base kernels learned
// jointly with the collocation coefficients.

#include "koopkern/lbfgs.hpp"
#include "koopkern/variational.hpp"

#include <cstdint>

namespace koopkern {

struct MKLConfig {
  std::vector<KernelSpec> kernels = default_mkl_kernels();
  /// eta and mu_grad are shared with the plain collocation solve.
  PenaltyConfig penalties;
  /// 0: beta = softmax(theta). > 0: auxiliary weights u = exp(theta) carry
  /// the kernel sum u_1 k_1 + ... + u_L k_L and the penalty lambda_l1 sum(u);
  /// beta = u / sum(u) is reported.
  double lambda_l1 = 0.0;
  double tau = 0.1;
  LbfgsOptions optimizer;
  std::uint64_t seed = 0;
  /// Standard deviation of a seeded perturbation of the uniform start.
  double init_jitter = 0.0;

  void validate() const;
};

struct MKLResult {
  std::vector<KernelSpec> kernels;
  std::vector<double> beta;
  std::vector<double> pruned_beta;  ///< empty when every weight was pruned
  Solution solution;                ///< collocation solve with the learned mixture
  std::vector<double> loss_trace;
  std::vector<std::vector<double>> beta_trace;
  double l1_mass = 1.0;  ///< sum(u) in the auxiliary mode, 1 otherwise
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::string l1_note;

  [[nodiscard]] std::optional<double> rmse_rescaled() const { return solution.rmse_rescaled; }
};

/// Alternating scheme: exact alpha for each beta iterate, L-BFGS on the
/// weight parameters with envelope-theorem gradients.
[[nodiscard]] MKLResult mkl_solve(SystemPtr system, double lambda, Points points,
                                  const MKLConfig& cfg);

/// beta_l < tau is zeroed and the survivors renormalized.
[[nodiscard]] MKLResult sparsify(MKLResult result, double tau);

/// Surviving kernels of a result as a mixture; throws Degenerate when none
/// survive.
[[nodiscard]] KernelMixture pruned_mixture(const MKLResult& result);

/// Plain collocation solve with a pruned mixture.
[[nodiscard]] Solution refit_pruned(SystemPtr system, double lambda, Points points,
                                    const KernelMixture& pruned,
                                    const PenaltyConfig& penalties = {});

}  // namespace koopkern
