#include "koopkern/dynamics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace koopkern;

TEST_CASE("flow semigroup on the linear test system") {
  const auto sys = make_linear_test(-1.0, 2.0);
  const double dt = 1e-2;
  for (const auto& x0 : oracle::random_points(20, 2, -1, 1, 11)) {
    const Vec direct = advance(*sys, x0, dt, 150);
    const Vec split = advance(*sys, advance(*sys, x0, dt, 60), dt, 90);
    Vec exact(2);
    exact << x0[0] * std::exp(-1.5), x0[1] * std::exp(3.0);
    const double single_err = (direct - exact).norm();
    CHECK((direct - split).norm() <= 5.0 * single_err + 1e-14);
  }
}

TEST_CASE("RK4 error ratio under step halving") {
  const auto sys = make_linear_test(-1.0, 2.0);
  const Vec x0 = Vec::Constant(2, 1.0);
  for (double h : {0.2, 0.1, 0.05}) {
    const double exact = std::exp(-1.0);
    const double e1 = std::abs(advance(*sys, x0, h, static_cast<int>(std::lround(1.0 / h)))[0] - exact);
    const double e2 = std::abs(advance(*sys, x0, h / 2, static_cast<int>(std::lround(2.0 / h)))[0] - exact);
    const double ratio = e1 / e2;
    CAPTURE(h);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
  }
}

TEST_CASE("left eigenvectors satisfy w^T E = lambda w^T") {
  for (const auto& sys : {make_poly2d(), make_duffing(), make_linear_test(-1.0, 2.0), make_cubic1d(),
                          make_poly2d(-2.0, 0.5), make_duffing(0.3, -2.0, 0.5)}) {
    const auto lin = linearize(*sys);
    const double scale = lin.jacobian.cwiseAbs().rowwise().sum().maxCoeff();
    for (std::size_t i = 0; i < lin.eigenvalues.size(); ++i) {
      const Vec& w = lin.left_eigenvectors[i];
      const Vec r = lin.jacobian.transpose() * w - lin.eigenvalues[i] * w;
      CHECK(r.cwiseAbs().maxCoeff() <= 1e-10 * scale);
      CHECK(w.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("nonlinear part of a linear system vanishes") {
  const auto sys = make_linear_test(-0.7, 1.3);
  const auto lin = linearize(*sys);
  for (const auto& x : oracle::random_points(200, 2, -2, 2, 4))
    CHECK(nonlinear_part(*sys, lin, x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("characteristic identity for closed-form eigenfunctions") {
  const auto cfg = IntegratorConfig::from_step(1e-3, 1.0);
  const auto poly = make_poly2d();
  const ScalarFn stable = [](const Vec& x) { return oracle::poly2d_phi_stable(x[0], x[1]); };
  const ScalarFn unstable = [](const Vec& x) { return oracle::poly2d_phi_unstable(x[0], x[1]); };
  for (const auto& x : oracle::random_points(25, 2, -0.5, 0.5, 6))
    for (double t : {-0.5, 0.25, 0.5, 1.0}) {
      CHECK(characteristic_identity_residual(*poly, stable, -1.0, x, t, cfg) <= 1e-4);
      CHECK(characteristic_identity_residual(*poly, unstable, 3.0, x, t, cfg) <= 1e-4);
    }
  const auto cubic = make_cubic1d();
  const ScalarFn phi = [](const Vec& x) { return oracle::cubic1d_phi(x[0]); };
  for (double x : {-0.9, -0.4, 0.1, 0.6})
    for (double t : {-1.0, 0.5, 1.0})
      CHECK(characteristic_identity_residual(*cubic, phi, 1.0, Vec::Constant(1, x), t, cfg) <= 1e-4);
}
