#pragma once

// Limited-memory BFGS with Armijo backtracking. Accepted steps never
// increase the objective, so the recorded loss trace is monotone.

#include "koopkern/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace koopkern {

struct LbfgsOptions {
  int max_iterations = 100;
  /// Stop when ||grad||_inf <= gradient_tolerance.
  double gradient_tolerance = 1e-5;
  /// Stop when the relative decrease of f falls below this.
  double function_tolerance = 1e-12;
  int memory = 8;
  double armijo = 1e-4;
  int max_backtracks = 40;
};

struct LbfgsResult {
  Vec x;
  double f = 0.0;
  Vec gradient;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> loss_trace;  ///< f at x0 and after every accepted step
  std::vector<Vec> x_trace;
};

/// fn returns f(x) and writes the gradient. A non-finite f at the starting
/// point, or at every backtracking trial, throws Divergence carrying the
/// last finite iterate.
using Objective = std::function<double(const Vec& x, Vec& grad)>;

[[nodiscard]] LbfgsResult lbfgs_minimize(const Objective& fn, Vec x0,
                                         const LbfgsOptions& opts = {});

}  // namespace koopkern
