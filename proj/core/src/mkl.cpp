#include "koopkern/mkl.hpp"

#include "koopkern/errors.hpp"
#include "koopkern/parallel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <random>

namespace koopkern {

void MKLConfig::validate() const {
  if (kernels.size() < 2) throw ContractViolation("mkl: need at least 2 base kernels");
  if (!(tau >= 0.0 && tau < 1.0)) throw ContractViolation("mkl: tau must lie in [0, 1)");
  if (!(lambda_l1 >= 0.0) || !std::isfinite(lambda_l1))
    throw ContractViolation("mkl: lambda_l1 must be >= 0");
  if (!(init_jitter >= 0.0)) throw ContractViolation("mkl: init_jitter must be >= 0");
  if (penalties.hard_anchor) throw ContractViolation("mkl: the anchor is always soft");
  penalties.validate();
}

namespace {

std::vector<double> softmax(const Vec& theta) {
  const double m = theta.maxCoeff();
  std::vector<double> b(static_cast<std::size_t>(theta.size()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) sum += b[static_cast<std::size_t>(i)] = std::exp(theta[i] - m);
  for (auto& v : b) v /= sum;
  return b;
}

struct MklObjective {
  const std::vector<Assembled>& parts;
  const Vec& w;
  const PenaltyConfig& pen;
  double lambda_l1;

  // Weights v enter the kernel linearly; returns the loss at the exact
  // alpha and dL/dv by the envelope theorem.
  double loss(const std::vector<double>& v, Vec& grad_v, Vec* alpha_out) const {
    Assembled a = parts[0].scaled(v[0]);
    for (std::size_t l = 1; l < parts.size(); ++l) a += parts[l].scaled(v[l]);
    const Vec alpha = solve_coefficients(a, w, pen);
    const double n = static_cast<double>(a.B.rows());
    const Vec r = a.B * alpha;
    const Vec c = a.G0 * alpha - w;
    const Vec t = a.T * alpha;
    const Vec y = a.Y * alpha;
    double L = r.squaredNorm() / n + pen.eta * alpha.squaredNorm() + pen.mu_grad * c.squaredNorm() +
               pen.mu_trace * t.squaredNorm() + pen.mu_layer * y.squaredNorm();
    grad_v.resize(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t l = 0; l < parts.size(); ++l) {
      const auto& p = parts[l];
      double g = 2.0 / n * r.dot(p.B * alpha) + 2.0 * pen.mu_grad * c.dot(p.G0 * alpha);
      if (t.size()) g += 2.0 * pen.mu_trace * t.dot(p.T * alpha);
      if (y.size()) g += 2.0 * pen.mu_layer * y.dot(p.Y * alpha);
      grad_v[static_cast<Eigen::Index>(l)] = g;
    }
    if (lambda_l1 > 0.0) {
      double mass = 0.0;
      for (double u : v) mass += std::abs(u);
      L += lambda_l1 * mass;
      grad_v.array() += lambda_l1;
    }
    if (alpha_out) *alpha_out = alpha;
    return L;
  }
};

}  // namespace

MKLResult mkl_solve(SystemPtr system, double lambda, Points points, const MKLConfig& cfg) {
  cfg.validate();
  const auto L = cfg.kernels.size();
  const auto problem =
      make_problem(system, lambda, KernelMixture::uniform(cfg.kernels), std::move(points), cfg.penalties);

  std::vector<Assembled> parts(L);
  for (std::size_t l = 0; l < L; ++l) parts[l] = assemble_kernel(problem, cfg.kernels[l]);

  const bool aux = cfg.lambda_l1 > 0.0;
  const MklObjective obj{parts, problem.anchor_target, problem.penalties, cfg.lambda_l1};

  auto weights_of = [&](const Vec& theta) {
    if (!aux) return softmax(theta);
    std::vector<double> u(L);
    for (std::size_t l = 0; l < L; ++l) u[l] = std::exp(theta[static_cast<Eigen::Index>(l)]);
    return u;
  };

  auto fn = [&](const Vec& theta, Vec& grad) {
    const auto v = weights_of(theta);
    Vec gv;
    double f = 0.0;
    try {
      f = obj.loss(v, gv, nullptr);
    } catch (const IllConditioned&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const Vec vv = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(L));
    if (aux) {
      grad = vv.cwiseProduct(gv);
    } else {
      grad = vv.cwiseProduct((gv.array() - vv.dot(gv)).matrix());
    }
    return f;
  };

  Vec theta0 = aux ? Vec::Constant(static_cast<Eigen::Index>(L), -std::log(static_cast<double>(L)))
                   : Vec::Zero(static_cast<Eigen::Index>(L));
  if (cfg.init_jitter > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, cfg.init_jitter);
    for (Eigen::Index i = 0; i < theta0.size(); ++i) theta0[i] += normal(rng);
  }

  const auto opt = lbfgs_minimize(fn, theta0, cfg.optimizer);

  MKLResult res;
  res.kernels = cfg.kernels;
  res.loss_trace = opt.loss_trace;
  res.iterations = opt.iterations;
  res.converged = opt.converged;
  res.stop_reason = opt.stop_reason;
  auto normalized = [&](const Vec& theta) {
    auto v = weights_of(theta);
    if (aux) {
      double s = 0.0;
      for (double u : v) s += u;
      for (auto& u : v) u /= s;
    }
    return v;
  };
  for (const auto& th : opt.x_trace) res.beta_trace.push_back(normalized(th));
  res.beta = normalized(opt.x);
  if (aux) {
    res.l1_mass = 0.0;
    for (double u : weights_of(opt.x)) res.l1_mass += u;
    res.l1_note = fmt::format(
        "L1 on the simplex is constant; lambda_l1={} acts on auxiliary weights u=exp(theta), "
        "beta=u/sum(u)",
        cfg.lambda_l1);
  } else {
    res.l1_note = "lambda_l1=0: softmax weights, no L1 term";
  }

  auto solved = problem;
  solved.kernel = KernelMixture(cfg.kernels, res.beta);
  Assembled a = parts[0].scaled(res.beta[0]);
  for (std::size_t l = 1; l < L; ++l) a += parts[l].scaled(res.beta[l]);
  res.solution = solve_assembled(solved, a);
  return res;
}

MKLResult sparsify(MKLResult result, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw ContractViolation("sparsify: tau must lie in [0, 1)");
  std::vector<double> kept(result.beta.size(), 0.0);
  double sum = 0.0;
  for (std::size_t l = 0; l < kept.size(); ++l)
    if (result.beta[l] >= tau) sum += kept[l] = result.beta[l];
  if (sum > 0.0) {
    for (auto& v : kept) v /= sum;
    result.pruned_beta = std::move(kept);
  } else {
    result.pruned_beta.clear();
  }
  return result;
}

KernelMixture pruned_mixture(const MKLResult& result) {
  if (result.pruned_beta.empty()) throw Degenerate("every kernel was pruned; the model is zero");
  std::vector<KernelSpec> ks;
  std::vector<double> bs;
  for (std::size_t l = 0; l < result.pruned_beta.size(); ++l)
    if (result.pruned_beta[l] > 0.0) {
      ks.push_back(result.kernels[l]);
      bs.push_back(result.pruned_beta[l]);
    }
  double sum = 0.0;
  for (double b : bs) sum += b;
  for (auto& b : bs) b /= sum;
  return KernelMixture(std::move(ks), std::move(bs));
}

Solution refit_pruned(SystemPtr system, double lambda, Points points, const KernelMixture& pruned,
                      const PenaltyConfig& penalties) {
  if (pruned.size() == 0) throw Degenerate("refit_pruned: empty mixture");
  return solve(make_problem(std::move(system), lambda, pruned, std::move(points), penalties));
}

}  // namespace koopkern
