#include "koopkern/errors.hpp"
#include "koopkern/linalg.hpp"
#include "koopkern/transport_green.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace koopkern;

namespace {

AdvectionProblem unit_problem(double lambda = 1.0) {
  AdvectionProblem p;
  p.c = 1.0;
  p.lambda = lambda;
  p.a = -30.0;
  p.b = 5.0;
  return p;
}

QuadratureRule rule() { return QuadratureRule::gauss_legendre(0.0, 1.0, 40, 8); }

}  // namespace

TEST_CASE("green's function values") {
  const auto p = unit_problem();
  CHECK(green_advection(p, 0.0, 0.5) == 0.0);
  CHECK(green_advection(p, 0.5, 0.5) == 1.0);
  CHECK(green_advection(p, 1.0, 0.0) == doctest::Approx(0.367879441171).epsilon(1e-12));
}

TEST_CASE("symmetrized kernel against the closed-form integral") {
  const auto p = unit_problem();
  CHECK(symmetrized_kernel(p, 1.0, 1.0, rule()) == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(std::abs(symmetrized_kernel(p, 0.0, 1.0, rule()) - std::exp(-1.0) / 2.0) <= 1e-4);
  for (double x : {-4.0, -1.0, 0.0, 2.5})
    for (double y : {-3.0, 0.5, 4.0})
      CHECK(symmetrized_kernel(p, x, y, rule()) ==
            doctest::Approx(oracle::truncated_advection_kernel(1.0, 1.0, p.a, x, y)).epsilon(1e-12));
  CHECK(symmetrized_kernel(p, -31.0, -32.0, rule()) == 0.0);
}

TEST_CASE("resolvent kernel values") {
  const auto p = unit_problem();
  CHECK(resolvent_kernel_advection(p, 1.0, 0.0, 1.0) == 0.0);
  CHECK(resolvent_kernel_advection(p, 0.0, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  auto p2 = p;
  p2.c = 2.0;
  CHECK(resolvent_kernel_advection(p2, 0.0, 2.0, 1.0) == doctest::Approx(0.5 * std::exp(-1.0)));
  auto pn = p;
  pn.c = -1.0;
  CHECK(resolvent_kernel_advection(pn, 1.0, 0.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS((void)resolvent_kernel_advection(p, 0.0, 1.0, 0.0), ContractViolation);
}

TEST_CASE("analytic kernel and its diagonal law") {
  CHECK(analytic_advection_kernel(unit_problem(1.0), 0.3, 0.3) == doctest::Approx(0.5));
  CHECK(analytic_advection_kernel(unit_problem(2.0), 0.3, 0.3) == doctest::Approx(0.25));
  auto p = unit_problem();
  p.weight = [](double) { return 2.0; };
  CHECK_THROWS_AS((void)analytic_advection_kernel(p, 0.0, 0.0), ContractViolation);
}

TEST_CASE("unification on the default grid") {
  AdvectionProblem p;
  p.b = 5.0;
  const auto rep = unification_check(p, linspace(-5.0, 5.0, 20), rule());
  CHECK(rep.rows.size() == 400);
  CHECK(rep.max_rel_dev <= 1e-3);
  CHECK(rep.scale_green == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.scale_resolvent == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.max_diagonal_dev <= 1e-3);
}

TEST_CASE("unification with one grid point") {
  AdvectionProblem p;
  p.b = 5.0;
  const auto rep = unification_check(p, {0.0}, rule());
  CHECK(rep.max_rel_dev == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("unification rejects points outside the domain") {
  AdvectionProblem p;
  p.b = 5.0;
  CHECK_THROWS_AS((void)unification_check(p, {6.0}, rule()), ContractViolation);
}

TEST_CASE("problem validation and truncation helper") {
  AdvectionProblem p;
  p.c = 0.0;
  CHECK_THROWS_AS(p.validate(), ContractViolation);
  p.c = 1.0;
  p.lambda = -1.0;
  CHECK_THROWS_AS(p.validate(), ContractViolation);
  const auto t = AdvectionProblem::truncated_for(2.0, 1.0, -5.0, 5.0);
  CHECK(t.a == doctest::Approx(-35.0));
  CHECK(t.b == 5.0);
}

TEST_CASE("decay transport is advection") {
  const auto d = decay_transport(1.0, 1.0, -30.0, 5.0);
  const auto p = unit_problem();
  for (double x : {-2.0, 0.0, 1.5})
    for (double y : {-1.0, 0.25})
      CHECK(symmetrized_kernel(d, x, y, rule()) == symmetrized_kernel(p, x, y, rule()));
}
