#include "koopkern/char_kernel.hpp"

#include "koopkern/errors.hpp"
#include "koopkern/parallel.hpp"

#include <fmt/format.h>

#include <cmath>

namespace koopkern {

void PathIntegralConfig::validate() const {
  if (lambda == 0.0) throw ContractViolation("path integral: lambda must be nonzero");
  if (!(horizon > 0.0) || steps < 1)
    throw ContractViolation("path integral: need T > 0 and M >= 1");
  if (w.size() == 0 || w.isZero(0.0))
    throw ContractViolation("path integral: anchor vector w must be nonzero");
  if (!(escape_radius > 0.0))
    throw ContractViolation("path integral: escape radius must be > 0");
}

PathIntegralConfig mode_kernel_select(const LinearizationInfo& lin, double lambda,
                                      double horizon, int steps, double escape_radius) {
  if (lambda == 0.0)
    throw ContractViolation("mode_kernel_select: lambda = 0 has no path integral");
  const auto idx = lin.index_of(lambda, 1e-9);
  PathIntegralConfig cfg;
  cfg.lambda = lin.eigenvalues[idx];
  cfg.w = lin.left_eigenvectors[idx];
  cfg.horizon = horizon;
  cfg.steps = steps;
  cfg.direction = cfg.lambda > 0.0 ? Direction::forward : Direction::backward;
  cfg.escape_radius = escape_radius;
  cfg.validate();
  return cfg;
}

XiEvaluator::XiEvaluator(SystemPtr sys, PathIntegralConfig cfg)
    : XiEvaluator(sys, linearize(*sys), std::move(cfg)) {}

XiEvaluator::XiEvaluator(SystemPtr sys, LinearizationInfo lin, PathIntegralConfig cfg)
    : sys_(std::move(sys)), lin_(std::move(lin)), cfg_(std::move(cfg)) {
  if (!sys_) throw ContractViolation("XiEvaluator: null system");
  cfg_.validate();
  if (cfg_.w.size() != sys_->dim())
    throw ContractViolation("XiEvaluator: w has the wrong dimension");
  const bool forward = cfg_.direction == Direction::forward;
  if (forward != (cfg_.lambda > 0.0))
    throw ContractViolation(fmt::format(
        "XiEvaluator: {} integration does not decay for lambda = {}",
        to_string(cfg_.direction), cfg_.lambda));
}

double XiEvaluator::value(const Vec& x) const {
  if (x.size() != sys_->dim())
    throw ContractViolation("xi: state has the wrong dimension");
  const double h = cfg_.signed_dt();
  const Vec& w = cfg_.w;
  double xi = w.dot(x - lin_.equilibrium);
  Vec xk = x;
  for (int k = 0; k < cfg_.steps; ++k) {
    const Vec next = rk4_step(*sys_, xk, h);
    const double t_next = (k + 1) * h;
    if (!(next.norm() <= cfg_.escape_radius))
      throw BlowUp(fmt::format("xi: trajectory from ({}) left radius {:g} at t={:.6g}",
                               fmt::join(x.data(), x.data() + x.size(), ", "),
                               cfg_.escape_radius, t_next),
                   t_next);
    const Vec mid = 0.5 * (xk + next);
    const Vec nl = sys_->field(mid) - lin_.jacobian * (mid - lin_.equilibrium);
    xi += std::exp(-cfg_.lambda * (k * h + 0.5 * h)) * w.dot(nl) * h;
    xk = next;
  }
  return xi;
}

Vec XiEvaluator::values(const Points& xs) const {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  parallel_for(xs.size(), [&](std::size_t i) {
    out[static_cast<Eigen::Index>(i)] = value(xs[i]);
  });
  return out;
}

Vec XiEvaluator::gradient(const Vec& x, double h) const {
  Vec g(x.size());
  Vec xp = x;
  Vec xm = x;
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    xp[d] = x[d] + h;
    xm[d] = x[d] - h;
    g[d] = (value(xp) - value(xm)) / (2.0 * h);
    xp[d] = x[d];
    xm[d] = x[d];
  }
  return g;
}

double XiEvaluator::koopman_residual(const Vec& x, double fd_step) const {
  return eval_field(*sys_, x).dot(gradient(x, fd_step)) - cfg_.lambda * value(x);
}

double XiEvaluator::predicted_residual(const Vec& x) const {
  const double h = cfg_.signed_dt();
  const Vec end = advance(*sys_, x, h, cfg_.steps, cfg_.escape_radius);
  const double tau = h * cfg_.steps;
  const Vec nl = sys_->field(end) - lin_.jacobian * (end - lin_.equilibrium);
  return std::exp(-cfg_.lambda * tau) * cfg_.w.dot(nl);
}

KernelSpec rank_one_kernel(XiPtr ev, double fd_step) {
  if (!ev) throw ContractViolation("rank_one_kernel: null evaluator");
  auto feature = std::make_shared<RankOneFeature>();
  feature->value = [ev](const Vec& x) { return ev->value(x); };
  feature->gradient = [ev, fd_step](const Vec& x) { return ev->gradient(x, fd_step); };
  feature->label = fmt::format("xi[{},lambda={}]", ev->system().name(), ev->config().lambda);
  return KernelSpec::rank_one(std::move(feature));
}

KernelMixture experimental_sum_kernel(XiPtr plus, XiPtr minus) {
  if (!plus || !minus) throw ContractViolation("experimental_sum_kernel: null evaluator");
  if (plus->system_ptr() != minus->system_ptr())
    throw ContractViolation("experimental_sum_kernel: modes of different systems");
  return KernelMixture({rank_one_kernel(std::move(plus)), rank_one_kernel(std::move(minus))},
                       {0.5, 0.5});
}

}  // namespace koopkern
