#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace koopkern {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A collection of state vectors of common dimension.
using Points = std::vector<Vec>;

/// Scalar observable on state space.
using ScalarFn = std::function<double(const Vec&)>;

/// Builds a tensor-product grid. `lower`, `upper` and `counts` must have the
/// same length; the first axis varies slowest.
Points tensor_grid(const Vec& lower, const Vec& upper,
                   const std::vector<int>& counts);

/// Evenly spaced values on [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, int n);

/// Evaluates `fn` at each point.
Vec evaluate_on(const ScalarFn& fn, const Points& points);

}  // namespace koopkern
