#pragma once

// Penalized collocation for f.grad(phi) = lambda phi with
// phi(x) = sum_j alpha_j k(x, x_j).

#include "koopkern/dynamics.hpp"
#include "koopkern/kernel_bank.hpp"

#include <optional>

namespace koopkern {

struct PenaltyConfig {
  double eta = 1e-8;
  double mu_grad = 1e4;
  double mu_trace = 0.0;
  double mu_layer = 0.0;
  /// Layer band: |x - center|_inf / half-width > layer_fraction.
  double layer_fraction = 0.9;
  /// Enforce grad phi(x_a) = w exactly (KKT system) instead of the
  /// mu_grad penalty.
  bool hard_anchor = false;

  /// Defaults with mu_trace = mu_layer = 1e2.
  static PenaltyConfig with_boundary();
  void validate() const;
};

struct CollocationProblem {
  SystemPtr system;
  double lambda = 0.0;
  KernelMixture kernel = KernelMixture::single(KernelSpec::gaussian(1.0));
  Points points;
  Vec anchor_point;
  Vec anchor_target;
  PenaltyConfig penalties;
  Points trace_points;
  Points layer_points;

  void validate() const;
};

/// Builds a problem with anchor at the equilibrium and target w equal to
/// the left eigenvector for lambda (unless given). Trace points are the
/// grid points that are extreme in some coordinate; layer points are those
/// in the outer band of the bounding box.
[[nodiscard]] CollocationProblem make_problem(SystemPtr system, double lambda,
                                              KernelMixture kernel, Points points,
                                              PenaltyConfig penalties = {},
                                              std::optional<Vec> anchor_target = std::nullopt);

[[nodiscard]] Points trace_points_of(const Points& points);
[[nodiscard]] Points layer_points_of(const Points& points, double fraction);

/// B (N x N): B_ij = grad_x k(x_i, x_j).f(x_i) - lambda k(x_i, x_j).
/// G0 (dim x N): anchor gradients. T: kernel rows at trace points.
/// Y: kernel rows at layer points divided by sqrt(|layer|).
struct Assembled {
  Mat B;
  Mat G0;
  Mat T;
  Mat Y;
  bool non_smooth = false;

  Assembled& operator+=(const Assembled& o);
  [[nodiscard]] Assembled scaled(double s) const;
};

[[nodiscard]] Assembled assemble(const CollocationProblem& problem);
/// Same blocks for one base kernel (mixtures assemble linearly).
[[nodiscard]] Assembled assemble_kernel(const CollocationProblem& problem,
                                        const KernelSpec& kernel);

/// B^T B / N + eta I + mu_grad G0^T G0 + mu_trace T^T T + mu_layer Y^T Y.
[[nodiscard]] Mat normal_matrix(const Assembled& a, const PenaltyConfig& pen);

struct RescaleResult {
  double c_star = 0.0;
  double rmse = 0.0;
};

/// c* = <l, r> / <l, l> and rmse of c* l - r with the mean as inner
/// product (or weights, when given). Throws Degenerate when l = 0 or
/// c* = 0.
[[nodiscard]] RescaleResult rescale_rmse(const Vec& learned, const Vec& reference,
                                         const Vec& weights = Vec());

struct Solution {
  Vec alpha;
  KernelMixture kernel = KernelMixture::single(KernelSpec::gaussian(1.0));
  Points centers;
  SystemPtr system;
  double lambda = 0.0;

  double residual_norm = 0.0;  ///< ||B alpha||_2 / sqrt(N)
  double anchor_error = 0.0;   ///< ||grad phi(x_a) - w||
  Vec derivative_at_anchor;
  double jitter = 0.0;         ///< relative diagonal jitter that was needed
  bool non_smooth = false;

  std::optional<double> rmse_raw;
  std::optional<double> rmse_rescaled;
  std::optional<double> rescale_factor;
};

/// Normal equations with LLT; jitter 1e-12..1e-8 (relative to the largest
/// diagonal entry) on failure, then IllConditioned. Fills the RMSE fields
/// when a reference is given or the system ships one for lambda; RMSE is
/// measured on the collocation points.
[[nodiscard]] Solution solve(const CollocationProblem& problem,
                             std::optional<ScalarFn> reference = std::nullopt);
[[nodiscard]] Solution solve_assembled(const CollocationProblem& problem, const Assembled& a,
                                       std::optional<ScalarFn> reference = std::nullopt);

/// Coefficients only; used by the MKL inner loop.
[[nodiscard]] Vec solve_coefficients(const Assembled& a, const Vec& w,
                                     const PenaltyConfig& pen, double* jitter = nullptr);

[[nodiscard]] Vec evaluate(const Solution& s, const Points& probes);
[[nodiscard]] double evaluate_at(const Solution& s, const Vec& x);
[[nodiscard]] Vec gradient_at(const Solution& s, const Vec& x);
/// f(p).grad phi(p) - lambda phi(p) at each probe.
[[nodiscard]] Vec residual_field(const Solution& s, const Points& probes);

}  // namespace koopkern
