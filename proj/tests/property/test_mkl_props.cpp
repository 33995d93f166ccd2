#include "koopkern/mkl.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace koopkern;

namespace {

Points grid(int n) { return tensor_grid(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {n, n}); }

MKLConfig small_config() {
  MKLConfig cfg;
  cfg.kernels = {KernelSpec::polynomial(2, 0.5), KernelSpec::polynomial(3, 1.0), KernelSpec::gaussian(1.0),
                 KernelSpec::cauchy(1.0)};
  cfg.init_jitter = 0.3;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("every iterate stays on the simplex and the loss never rises") {
  for (double l1 : {0.0, 0.1}) {
    auto cfg = small_config();
    cfg.lambda_l1 = l1;
    const auto r = mkl_solve(make_poly2d(), -1.0, grid(9), cfg);
    for (const auto& b : r.beta_trace) {
      CHECK(std::abs(std::accumulate(b.begin(), b.end(), 0.0) - 1.0) <= 1e-9);
      for (double v : b) CHECK(v > 0.0);
    }
    for (std::size_t i = 1; i < r.loss_trace.size(); ++i) CHECK(r.loss_trace[i] <= r.loss_trace[i - 1] + 1e-12);
  }
}

TEST_CASE("larger lambda_l1 never raises the auxiliary mass") {
  double prev = INFINITY;
  for (double l1 : {0.0, 0.1, 1.0, 10.0}) {
    auto cfg = small_config();
    cfg.lambda_l1 = l1;
    const auto r = mkl_solve(make_poly2d(), -1.0, grid(9), cfg);
    const double mass = l1 > 0.0 ? r.l1_mass : std::accumulate(r.beta.begin(), r.beta.end(), 0.0);
    CAPTURE(l1);
    CHECK(mass <= prev + 1e-9);
    prev = mass;
  }
}

TEST_CASE("identical inputs give bitwise identical traces") {
  const auto cfg = small_config();
  const auto a = mkl_solve(make_poly2d(), 3.0, grid(9), cfg);
  const auto b = mkl_solve(make_poly2d(), 3.0, grid(9), cfg);
  CHECK(a.beta_trace == b.beta_trace);
  CHECK(a.loss_trace == b.loss_trace);
}
