#include "koopkern/linalg.hpp"
#include "koopkern/transport_green.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace koopkern;

namespace {

QuadratureRule rule() { return QuadratureRule::gauss_legendre(0.0, 1.0, 40, 8); }

Mat kernel_gram(const AdvectionProblem& p, const std::vector<double>& xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Mat g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      g(i, j) = symmetrized_kernel(p, xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)], rule());
  return g;
}

}  // namespace

TEST_CASE("symmetrized kernels are symmetric") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    const auto p = AdvectionProblem::truncated_for(1.0, lambda, -5.0, 5.0);
    const auto xs = linspace(-5.0, 5.0, 13);
    for (double x : xs)
      for (double y : xs) {
        CHECK(std::abs(symmetrized_kernel(p, x, y, rule()) - symmetrized_kernel(p, y, x, rule())) <= 1e-12);
        CHECK(std::abs(symmetrized_resolvent(p, x, y, lambda, rule()) -
                       symmetrized_resolvent(p, y, x, lambda, rule())) <= 1e-12);
      }
  }
}

TEST_CASE("symmetrized kernel gram is positive semidefinite") {
  const auto p = AdvectionProblem::truncated_for(1.0, 1.0, -5.0, 5.0);
  const Mat g = kernel_gram(p, linspace(-5.0, 5.0, 30));
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8 * g.diagonal().maxCoeff());
}

TEST_CASE("exponential kernel law in the interior") {
  for (double lambda : {0.5, 1.0, 3.0}) {
    const auto p = AdvectionProblem::truncated_for(1.0, lambda, -3.0, 3.0);
    for (double x : linspace(-3.0, 3.0, 7))
      for (double y : linspace(-3.0, 3.0, 7))
        CHECK(symmetrized_kernel(p, x, y, rule()) * 2.0 * lambda * std::exp(lambda * std::abs(x - y)) ==
              doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("decay transport passes the same checks") {
  const auto d = decay_transport(1.0, 1.0, -30.0, 5.0);
  const auto rep = unification_check(d, linspace(-5.0, 5.0, 20), rule());
  CHECK(rep.max_rel_dev <= 1e-3);
  CHECK(rep.max_diagonal_dev <= 1e-3);
  const Mat g = kernel_gram(d, linspace(-5.0, 5.0, 20));
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}
