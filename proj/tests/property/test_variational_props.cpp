#include "koopkern/variational.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace koopkern;

namespace {

Points grid(int n) { return tensor_grid(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {n, n}); }

}  // namespace

TEST_CASE("normal matrix is positive definite for eta > 0") {
  for (const auto& k : {KernelSpec::gaussian(1.0), KernelSpec::polynomial(2, 0.5), KernelSpec::cauchy(1.0),
                        KernelSpec::triangular(2.0)})
    for (double eta : {1e-8, 1e-4, 1.0}) {
      PenaltyConfig pen;
      pen.eta = eta;
      const auto p = make_problem(make_poly2d(), -1.0, KernelMixture::single(k), grid(7), pen);
      const Mat A = normal_matrix(assemble(p), pen);
      CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * A.cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Mat> es(A);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("doubling the anchor target doubles the solution") {
  const auto sys = make_poly2d();
  const auto lin = linearize(*sys);
  for (double lambda : {-1.0, 3.0}) {
    const Vec w = lin.left_eigenvector_for(lambda);
    const auto mix = KernelMixture::single(KernelSpec::gaussian(1.0));
    const auto s1 = solve(make_problem(sys, lambda, mix, grid(9), {}, w));
    const auto s2 = solve(make_problem(sys, lambda, mix, grid(9), {}, Vec(2.0 * w)));
    CHECK((s2.alpha - 2.0 * s1.alpha).norm() <= 1e-10 * s2.alpha.norm());
    for (const auto& x : oracle::random_points(5, 2, -1, 1, 1))
      CHECK(std::abs(evaluate_at(s2, x) - 2.0 * evaluate_at(s1, x)) <= 1e-10 * (1.0 + std::abs(evaluate_at(s2, x))));
  }
}

TEST_CASE("raising mu_trace does not raise the trace energy") {
  const auto sys = make_cubic1d();
  Points pts;
  for (double x : linspace(-0.95, 0.95, 41)) pts.push_back(Vec::Constant(1, x));
  double prev = INFINITY;
  for (double mu : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
    PenaltyConfig pen;
    pen.mu_trace = mu;
    const auto p = make_problem(sys, 1.0, KernelMixture::single(KernelSpec::gaussian_length(0.3)), pts, pen);
    const auto s = solve(p);
    const double energy = evaluate(s, p.trace_points).squaredNorm();
    CHECK(energy <= prev * (1.0 + 1e-9) + 1e-15);
    prev = energy;
  }
}

TEST_CASE("rescaled rmse is scale invariant") {
  const auto ref = oracle::random_points(1, 50, -1, 1, 2)[0];
  Vec learned = ref + 0.1 * oracle::random_points(1, 50, -1, 1, 3)[0];
  const double base = rescale_rmse(learned, ref).rmse;
  for (double s : {-3.0, -1e-3, 0.5, 7.0, 1e6}) CHECK(std::abs(rescale_rmse(s * learned, ref).rmse - base) <= 1e-12);
}

TEST_CASE("anchor penalty pins the gradient") {
  for (double mu : {1e-4, 1e0, 1e4}) {
    PenaltyConfig pen;
    pen.mu_grad = mu;
    pen.eta = 1e-8;
    const auto s = solve(make_problem(make_poly2d(), -1.0, KernelMixture::single(KernelSpec::polynomial(2, 0.5)),
                                      grid(21), pen));
    CHECK(s.anchor_error <= 1e-2);
    CHECK(*s.rmse_rescaled <= *s.rmse_raw + 1e-12);
  }
}
