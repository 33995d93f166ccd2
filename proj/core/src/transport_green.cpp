#include "koopkern/transport_green.hpp"

#include "koopkern/errors.hpp"
#include "koopkern/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace koopkern {

void AdvectionProblem::validate() const {
  if (c == 0.0 || !std::isfinite(c)) throw ContractViolation("advection: c must be nonzero");
  if (!(lambda > 0.0)) throw ContractViolation("advection: lambda must be > 0");
  if (!(a < b)) throw ContractViolation("advection: need a < b");
}

AdvectionProblem AdvectionProblem::truncated_for(double c, double lambda, double x_min,
                                                 double x_max) {
  AdvectionProblem p;
  p.c = c;
  p.lambda = lambda;
  p.a = x_min - 15.0 / lambda * std::abs(c);
  p.b = x_max;
  p.validate();
  return p;
}

AdvectionProblem decay_transport(double f, double lambda, double a, double b) {
  AdvectionProblem p;
  p.c = f;
  p.lambda = lambda;
  p.a = a;
  p.b = b;
  p.validate();
  return p;
}

double green_advection(const AdvectionProblem& p, double x, double xi) {
  if (x < xi) return 0.0;
  return std::exp(-(p.lambda / p.c) * (x - xi));
}

namespace {

// Integrand support is [a, min(x, y)]; both factors vanish above it.
template <class Fn>
double integrate_below(const AdvectionProblem& p, double x, double y, const QuadratureRule& q,
                       Fn&& integrand) {
  q.validate();
  const double hi = std::min({x, y, p.b});
  if (hi <= p.a) return 0.0;
  return q.mapped(p.a, hi).integrate(integrand);
}

}  // namespace

double symmetrized_kernel(const AdvectionProblem& p, double x, double y,
                          const QuadratureRule& q) {
  p.validate();
  return integrate_below(p, x, y, q, [&](double s) {
    return green_advection(p, x, s) * green_advection(p, y, s) * p.w(s);
  });
}

double resolvent_kernel_advection(const AdvectionProblem& p, double x, double y, double alpha) {
  if (!(alpha > 0.0)) throw ContractViolation("resolvent: alpha must be > 0");
  if (p.c == 0.0) throw ContractViolation("resolvent: c must be nonzero");
  const double t = (y - x) / p.c;  // time at which s_t(x) = y
  if (t < 0.0) return 0.0;
  return std::exp(-alpha * t) / std::abs(p.c);
}

double symmetrized_resolvent(const AdvectionProblem& p, double x, double y, double alpha,
                             const QuadratureRule& q) {
  p.validate();
  return integrate_below(p, x, y, q, [&](double s) {
    return resolvent_kernel_advection(p, s, x, alpha) *
           resolvent_kernel_advection(p, s, y, alpha) * p.w(s);
  });
}

double analytic_advection_kernel(const AdvectionProblem& p, double x, double y) {
  if (!(p.c > 0.0) || !p.unit_weight())
    throw ContractViolation("analytic advection kernel needs c > 0 and w = 1");
  return p.c / (2.0 * p.lambda) * std::exp(-(p.lambda / p.c) * std::abs(x - y));
}

UnificationReport unification_check(const AdvectionProblem& p, const std::vector<double>& grid,
                                    const QuadratureRule& q) {
  p.validate();
  q.validate();
  for (double g : grid)
    if (g < p.a || g > p.b)
      throw ContractViolation(fmt::format("unification: grid point {} outside [a, b]", g));

  UnificationReport rep;
  rep.alpha = p.lambda;
  const std::size_t n = grid.size();
  rep.rows.resize(n * n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto& r = rep.rows[i * n + j];
      r.x = grid[i];
      r.y = grid[j];
      r.k_green = symmetrized_kernel(p, r.x, r.y, q);
      r.k_analytic = analytic_advection_kernel(p, r.x, r.y);
      r.k_resolvent_sym = symmetrized_resolvent(p, r.x, r.y, rep.alpha, q);
    }
  });
  if (rep.rows.empty()) return rep;

  // Least squares in relative terms: minimize sum ((s K_i - A_i) / A_i)^2.
  auto fit = [&](auto member) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& r : rep.rows) {
      const double ratio = r.*member / r.k_analytic;
      num += ratio;
      den += ratio * ratio;
    }
    if (!(den > 0.0)) throw Degenerate("unification: constructed kernel vanishes on the grid");
    return num / den;
  };
  rep.scale_green = fit(&UnificationRow::k_green);
  rep.scale_resolvent = fit(&UnificationRow::k_resolvent_sym);

  for (auto& r : rep.rows) {
    const double dg = std::abs(rep.scale_green * r.k_green - r.k_analytic);
    const double dr = std::abs(rep.scale_resolvent * r.k_resolvent_sym - r.k_analytic);
    r.rel_dev = std::max(dg, dr) / r.k_analytic;
    rep.max_rel_dev = std::max(rep.max_rel_dev, r.rel_dev);
    if (r.x == r.y)
      rep.max_diagonal_dev = std::max(
          rep.max_diagonal_dev, std::abs(2.0 * p.lambda * r.k_green / p.c - 1.0));
  }
  return rep;
}

}  // namespace koopkern
