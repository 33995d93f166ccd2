#include "koopkern/char_kernel.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace koopkern;

namespace {

XiEvaluator make_xi(const SystemPtr& sys, double lambda, double T, int M, double escape = 1e12) {
  const auto lin = linearize(*sys);
  return XiEvaluator(sys, lin, mode_kernel_select(lin, lambda, T, M, escape));
}

}  // namespace

TEST_CASE("xi vanishes at the equilibrium of every system") {
  for (const auto& sys : {make_poly2d(), make_duffing(), make_linear_test(-1.0, 2.0), make_cubic1d()}) {
    const auto lin = linearize(*sys);
    for (double lambda : lin.eigenvalues) {
      const auto xi = make_xi(sys, lambda, 2.0, 500);
      CHECK(std::abs(xi.value(lin.equilibrium)) <= 1e-12);
    }
  }
}

TEST_CASE("gradient of xi at the equilibrium is the left eigenvector") {
  for (const auto& sys : {make_poly2d(), make_duffing(), make_linear_test(-1.0, 2.0)}) {
    const auto lin = linearize(*sys);
    for (std::size_t i = 0; i < lin.eigenvalues.size(); ++i) {
      const auto xi = make_xi(sys, lin.eigenvalues[i], 2.0, 1000);
      const Vec fd = oracle::fd_gradient([&](const Vec& x) { return xi.value(x); }, lin.equilibrium, 1e-4);
      CHECK((fd - lin.left_eigenvectors[i]).cwiseAbs().maxCoeff() <= 1e-4);
      CHECK((xi.gradient(lin.equilibrium) - lin.left_eigenvectors[i]).cwiseAbs().maxCoeff() <= 1e-4);
    }
  }
}

TEST_CASE("horizon convergence for the unstable poly2d mode") {
  // |xi_2T - xi_T| against T; the log-slope must be at least |lambda| steep.
  const auto sys = make_poly2d();
  const auto probes = oracle::random_points(8, 2, -0.3, 0.3, 12);
  std::vector<double> ts{0.4, 0.6, 0.8, 1.0}, logs;
  for (double T : ts) {
    const auto a = make_xi(sys, 3.0, T, static_cast<int>(4000 * T));
    const auto b = make_xi(sys, 3.0, 2 * T, static_cast<int>(8000 * T));
    double worst = 0.0;
    for (const auto& x : probes) worst = std::max(worst, std::abs(b.value(x) - a.value(x)));
    logs.push_back(std::log(worst));
  }
  double mt = 0, ml = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) mt += ts[i] / ts.size(), ml += logs[i] / ts.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) num += (ts[i] - mt) * (logs[i] - ml), den += (ts[i] - mt) * (ts[i] - mt);
  CHECK(num / den <= -3.0);
}

TEST_CASE("characteristic identity for xi along poly2d orbits") {
  const auto sys = make_poly2d();
  const auto xi = make_xi(sys, 3.0, 2.0, 4000);
  const ScalarFn f = [&](const Vec& x) { return xi.value(x); };
  const auto cfg = IntegratorConfig::from_step(1e-3, 1.0);
  for (const auto& x : oracle::random_points(10, 2, -0.2, 0.2, 13))
    for (double t : {0.1, 0.5, 1.0}) {
      const double r = characteristic_identity_residual(*sys, f, 3.0, x, t, cfg);
      CHECK(r * std::max(1.0, std::abs(f(x))) <= 1e-2 * (1.0 + std::abs(f(x))));
    }
}
