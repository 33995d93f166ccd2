#include "koopkern/errors.hpp"
#include "koopkern/variational.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace koopkern;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

Points poly_grid(int n = 21) { return tensor_grid(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {n, n}); }

Points cubic_grid() {
  Points pts;
  for (double x : linspace(-0.99, 0.99, 199)) pts.push_back(Vec::Constant(1, x));
  return pts;
}

KernelSpec exact_linear_feature() {
  auto feat = std::make_shared<RankOneFeature>();
  feat->value = [](const Vec& x) { return x[1]; };
  feat->gradient = [](const Vec&) { return v2(0.0, 1.0); };
  return KernelSpec::rank_one(feat);
}

}  // namespace

TEST_CASE("single-point gaussian residual matrix") {
  const auto sys = make_poly2d();
  const auto p = make_problem(sys, -1.0, KernelMixture::single(KernelSpec::gaussian(1.0)), {v2(0.3, 0.2)});
  const auto a = assemble(p);
  REQUIRE(a.B.rows() == 1);
  CHECK(a.B(0, 0) == doctest::Approx(1.0));  // -lambda with lambda = -1
  CHECK(a.G0.rows() == 2);
}

TEST_CASE("exact eigenfunction in the span has zero residual") {
  const auto sys = make_linear_test(-1.0, 2.0);
  const auto pts = oracle::random_points(15, 2, -1, 1, 1);
  const auto p = make_problem(sys, 2.0, KernelMixture::single(exact_linear_feature()), pts);
  CHECK(assemble(p).B.cwiseAbs().maxCoeff() <= 1e-14);
  const auto s = solve(p);
  CHECK(residual_field(s, oracle::random_points(10, 2, -1, 1, 2)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("poly2d with the degree-2 polynomial kernel") {
  const auto s = solve(make_problem(make_poly2d(), -1.0,
                                    KernelMixture::single(KernelSpec::polynomial(2, 0.5)), poly_grid()));
  REQUIRE(s.rmse_rescaled.has_value());
  CHECK(*s.rmse_rescaled <= 1e-4);
  CHECK(*s.rmse_rescaled <= *s.rmse_raw + 1e-12);
  CHECK(s.anchor_error <= 1e-2);
}

TEST_CASE("cubic1d singular kernel against the gaussian") {
  const auto sys = make_cubic1d();
  const auto sing = solve(make_problem(sys, 1.0, KernelMixture::single(KernelSpec::singular_1d()),
                                       cubic_grid(), PenaltyConfig::with_boundary()));
  const auto rbf = solve(make_problem(sys, 1.0, KernelMixture::single(KernelSpec::gaussian_length(0.3)),
                                      cubic_grid(), PenaltyConfig::with_boundary()));
  CHECK(*sing.rmse_rescaled <= 5e-4);
  CHECK(*rbf.rmse_rescaled >= 0.5);
  CHECK(std::isfinite(sing.derivative_at_anchor[0]));
}

TEST_CASE("evaluate and gradient_at") {
  auto s = solve(make_problem(make_poly2d(), 3.0, KernelMixture::single(KernelSpec::gaussian(2.0)),
                              poly_grid(9)));
  const Vec x = v2(0.13, -0.41);
  const Vec fd = oracle::fd_gradient([&](const Vec& z) { return evaluate_at(s, z); }, x);
  CHECK((gradient_at(s, x) - fd).norm() <= 1e-5 * (1.0 + fd.norm()));
  s.alpha.setZero();
  CHECK(evaluate(s, poly_grid(5)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rank-one solution is a multiple of the feature") {
  auto feat = std::make_shared<RankOneFeature>();
  feat->value = [](const Vec& x) { return x[0] + 0.3 * x[1] * x[1]; };
  feat->gradient = [](const Vec& x) { return v2(1.0, 0.6 * x[1]); };
  const auto pts = poly_grid(7);
  const auto s = solve(make_problem(make_poly2d(), -1.0, KernelMixture::single(KernelSpec::rank_one(feat)), pts));
  double c = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j) c += s.alpha[static_cast<Eigen::Index>(j)] * feat->value(pts[j]);
  for (const auto& x : oracle::random_points(5, 2, -1, 1, 3))
    CHECK(evaluate_at(s, x) == doctest::Approx(c * feat->value(x)).epsilon(1e-12));
}

TEST_CASE("rescale_rmse examples") {
  Vec r(4);
  r << 1.0, -2.0, 0.5, 3.0;
  auto a = rescale_rmse(r, r);
  CHECK(a.c_star == doctest::Approx(1.0));
  CHECK(a.rmse == doctest::Approx(0.0));
  auto b = rescale_rmse(2.0 * r, r);
  CHECK(b.c_star == doctest::Approx(0.5));
  CHECK(b.rmse <= 1e-15);
  Vec o(4);
  o << 2.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS((void)rescale_rmse(o, r), Degenerate);
  CHECK_THROWS_AS((void)rescale_rmse(Vec::Zero(4), r), Degenerate);
  CHECK_THROWS_AS((void)rescale_rmse(Vec::Ones(3), r), ContractViolation);
}

TEST_CASE("hard anchor enforces the gradient exactly") {
  PenaltyConfig pen;
  pen.hard_anchor = true;
  const auto s = solve(make_problem(make_poly2d(), -1.0, KernelMixture::single(KernelSpec::polynomial(3, 1.0)),
                                    poly_grid(11), pen));
  CHECK(s.anchor_error <= 1e-8);
}

TEST_CASE("trace and layer points") {
  const auto g = poly_grid(5);
  CHECK(trace_points_of(g).size() == 16);
  // Coordinates are -1, -0.5, 0, 0.5, 1.
  CHECK(layer_points_of(g, 0.9).size() == 16);
  CHECK(layer_points_of(g, 0.6).size() == 16);
  CHECK(layer_points_of(g, 0.4).size() == 24);
  CHECK(layer_points_of(g, 0.0).size() == 24);
}

TEST_CASE("problem validation") {
  const auto sys = make_poly2d();
  PenaltyConfig pen;
  pen.mu_grad = 0.0;
  CHECK_THROWS_AS((void)make_problem(sys, -1.0, KernelMixture::single(KernelSpec::gaussian(1.0)), poly_grid(3), pen),
                  ContractViolation);
  CHECK_THROWS_AS((void)make_problem(sys, -1.0, KernelMixture::single(KernelSpec::gaussian(1.0)), {}),
                  ContractViolation);
  CHECK_THROWS_AS((void)make_problem(sys, 0.5, KernelMixture::single(KernelSpec::gaussian(1.0)), poly_grid(3)),
                  UnknownEigenvalue);
  CHECK_THROWS_AS((void)make_problem(sys, -1.0, KernelMixture::single(KernelSpec::gaussian(1.0)), poly_grid(3), {},
                               Vec::Zero(2)),
                  ContractViolation);
}

TEST_CASE("singular kernel outside its domain names the point") {
  Points pts{Vec::Constant(1, 0.2), Vec::Constant(1, 1.0)};
  CHECK_THROWS_AS((void)solve(make_problem(make_cubic1d(), 1.0,
                                           KernelMixture::single(KernelSpec::singular_1d()), pts)),
                  DomainError);
}
