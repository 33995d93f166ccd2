#include "koopkern/kernel_bank.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace koopkern;

namespace {

std::vector<KernelSpec> families_2d() {
  return {KernelSpec::gaussian(1.0),     KernelSpec::gaussian_length(0.3), KernelSpec::exponential(1.0),
          KernelSpec::laplacian(2.0),    KernelSpec::cauchy(1.0),          KernelSpec::inverse_quadratic(0.5),
          KernelSpec::triangular(2.0),   KernelSpec::sigmoid(0.5, 0.0),    KernelSpec::polynomial(2, 0.5),
          KernelSpec::polynomial(3, 1.0), KernelSpec::polynomial(6, 1.5)};
}

double min_eig(const Mat& m) { return min_eigenvalue(m); }

}  // namespace

TEST_CASE("kernels are symmetric") {
  for (const auto& k : families_2d()) {
    CAPTURE(k.describe());
    const auto xs = oracle::random_points(1000, 2, -1, 1, 1);
    const auto ys = oracle::random_points(1000, 2, -1, 1, 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      worst = std::max(worst, std::abs(eval_kernel(k, xs[i], ys[i]) - eval_kernel(k, ys[i], xs[i])));
    CHECK(worst <= 1e-12);
  }
  const auto k = KernelSpec::singular_1d();
  const auto xs = oracle::random_points(1000, 1, -0.99, 0.99, 3);
  const auto ys = oracle::random_points(1000, 1, -0.99, 0.99, 4);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(std::abs(eval_kernel(k, xs[i], ys[i]) - eval_kernel(k, ys[i], xs[i])) <= 1e-12);
}

TEST_CASE("gram matrices are positive semidefinite") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    for (const auto& k : families_2d()) {
      if (!k.positive_definite_family()) continue;
      CAPTURE(k.describe());
      const auto g = gram(k, oracle::random_points(10 * seed, 2, -1, 1, seed));
      CHECK(min_eig(g.values) >= -1e-8 * g.values.diagonal().maxCoeff());
      CHECK(psd_check(g).passed);
    }
  const auto g = gram(KernelSpec::singular_1d(), oracle::random_points(50, 1, -0.99, 0.99, 9));
  CHECK(min_eig(g.values) >= -1e-8 * g.values.diagonal().maxCoeff());
}

TEST_CASE("analytic gradients agree with finite differences") {
  for (const auto& k : families_2d()) {
    CAPTURE(k.describe());
    const auto xs = oracle::random_points(100, 2, -1, 1, 5);
    const auto ys = oracle::random_points(100, 2, -1, 1, 6);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = (xs[i] - ys[i]).norm();
      if (k.family() == KernelFamily::triangular && std::abs(r - k.sigma()) < 1e-3) continue;
      const auto g = eval_kernel_grad_x(k, xs[i], ys[i]);
      if (g.non_smooth) continue;
      const Vec fd = oracle::fd_gradient([&](const Vec& z) { return eval_kernel(k, z, ys[i]); }, xs[i]);
      CHECK((g.value - fd).norm() <= 1e-5 * std::max(fd.norm(), 1e-2));
    }
  }
  const auto k = KernelSpec::singular_1d();
  for (const auto& x : oracle::random_points(100, 1, -0.9, 0.9, 7)) {
    const Vec y = Vec::Constant(1, 0.37);
    const Vec fd = oracle::fd_gradient([&](const Vec& z) { return eval_kernel(k, z, y); }, x);
    CHECK((eval_kernel_grad_x(k, x, y).value - fd).norm() <= 1e-5 * std::max(fd.norm(), 1e-2));
  }
}

TEST_CASE("mixture gram is linear in the weights") {
  const auto ks = default_mkl_kernels();
  std::vector<double> beta(ks.size());
  double s = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) s += (beta[i] = 1.0 + static_cast<double>(i % 4));
  for (auto& b : beta) b /= s;
  const KernelMixture mix(ks, beta);
  const auto pts = oracle::random_points(30, 2, -1, 1, 8);
  Mat want = Mat::Zero(30, 30);
  for (std::size_t i = 0; i < ks.size(); ++i) want += beta[i] * gram(ks[i], pts).values;
  CHECK((mixture_gram(mix, pts) - want).cwiseAbs().maxCoeff() <= 1e-14);
}
