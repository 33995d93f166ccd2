#pragma once

// Discrete Mercer decomposition on a weighted grid and two eigenfunction
// oracles built on it.

#include "koopkern/dynamics.hpp"
#include "koopkern/kernel_bank.hpp"

#include <string>
#include <vector>

namespace koopkern {

struct MercerDecomposition {
  /// Descending. Values in [-1e-8 mu_1, 0) are clipped to 0.
  Vec eigenvalues;
  /// Descending, before clipping.
  Vec raw_eigenvalues;
  /// Column n holds psi_n on the grid; sum_i w_i psi_n(x_i) psi_m(x_i) = delta_nm.
  Mat modes;
  Points grid;
  Vec weights;
  bool indefinite = false;  ///< some eigenvalue < -1e-4 mu_1
  std::vector<std::string> warnings;

  /// sum_n mu_n psi_n psi_n^T over the first k modes (all when k < 0),
  /// using the unclipped eigenvalues.
  [[nodiscard]] Mat reconstruct(int k = -1) const;
  /// max |<psi_i, psi_j>_w - delta_ij|.
  [[nodiscard]] double orthonormality_error() const;
};

/// Uniform quadrature weights 1/N.
[[nodiscard]] Vec uniform_weights(std::size_t n);

/// Eigendecomposition of W^{1/2} K W^{1/2}, modes mapped back by W^{-1/2}.
/// Grids are capped at 10^4 points.
[[nodiscard]] MercerDecomposition mercer_decompose(const Mat& K, Points grid, Vec weights);
[[nodiscard]] MercerDecomposition mercer_decompose(const KernelSpec& kernel, Points grid,
                                                   Vec weights);
[[nodiscard]] MercerDecomposition mercer_decompose(const KernelMixture& kernel, Points grid,
                                                   Vec weights);

struct ModeCheckReport {
  int rank = 0;
  Vec eigenvalues;
  /// max over n of |mu_n - 1| for n < m and |mu_n| otherwise.
  double max_deviation = 0.0;
  /// Largest principal angle between the top m Mercer modes and the input
  /// span, in radians.
  double subspace_angle = 0.0;
};

/// Orthonormalizes the given grid functions under <.,.>_w, builds
/// K = sum_j phi_j phi_j^T and decomposes it. Rank-deficient input throws
/// Degenerate.
[[nodiscard]] ModeCheckReport koopman_mode_check(const std::vector<Vec>& eigenfunctions,
                                                 const Points& grid, const Vec& weights);

struct EigenrelationReport {
  double max_deviation = 0.0;  ///< max |2 lambda (K phi)(x) / phi(x) - 1|
  std::size_t probes_used = 0;
  std::size_t probes_excluded = 0;
  double tail = 0.0;  ///< e^{-2 lambda T}, the continuum deviation
  std::vector<double> deviations;
};

/// (K phi)(x) = int_0^T e^{-lambda t} phi(s_{-t}(x)) dt by the midpoint rule
/// over M steps; midpoint states come from two RK4 half steps. Probes with
/// |phi(x)| < 1e-8 are skipped. Blow-up or no usable probe throws
/// Inconclusive.
[[nodiscard]] EigenrelationReport trajectory_eigenrelation_check(
    const SystemDef& system, const ScalarFn& phi, double lambda, const Points& probes,
    double horizon, int steps, double escape_radius = 1e6);

}  // namespace koopkern
