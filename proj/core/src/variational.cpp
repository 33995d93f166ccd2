#include "koopkern/variational.hpp"

#include "koopkern/errors.hpp"
#include "koopkern/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace koopkern {

PenaltyConfig PenaltyConfig::with_boundary() {
  PenaltyConfig p;
  p.mu_trace = 1e2;
  p.mu_layer = 1e2;
  return p;
}

void PenaltyConfig::validate() const {
  for (double v : {eta, mu_grad, mu_trace, mu_layer})
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ContractViolation("penalties must be finite and >= 0");
  if (!hard_anchor && !(mu_grad > 0.0))
    throw ContractViolation("mu_grad must be > 0 (the zero function is otherwise optimal)");
  if (!(layer_fraction >= 0.0 && layer_fraction < 1.0))
    throw ContractViolation("layer fraction must lie in [0, 1)");
}

void CollocationProblem::validate() const {
  if (!system) throw ContractViolation("collocation: no system");
  if (points.empty()) throw ContractViolation("collocation: need at least one point");
  const auto dim = system->dim();
  for (const auto& p : points)
    if (p.size() != dim) throw ContractViolation("collocation: point of wrong dimension");
  if (anchor_point.size() != dim || anchor_target.size() != dim)
    throw ContractViolation("collocation: anchor has the wrong dimension");
  if (anchor_target.isZero(0.0))
    throw ContractViolation("collocation: anchor target must be nonzero");
  penalties.validate();
}

Points trace_points_of(const Points& points) {
  if (points.empty()) return {};
  const auto dim = points.front().size();
  Vec lo = points.front();
  Vec hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Points out;
  for (const auto& p : points)
    for (Eigen::Index d = 0; d < dim; ++d)
      if (p[d] == lo[d] || p[d] == hi[d]) {
        out.push_back(p);
        break;
      }
  return out;
}

Points layer_points_of(const Points& points, double fraction) {
  if (points.empty()) return {};
  Vec lo = points.front();
  Vec hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec center = 0.5 * (lo + hi);
  const Vec half = 0.5 * (hi - lo);
  Points out;
  for (const auto& p : points) {
    double r = 0.0;
    for (Eigen::Index d = 0; d < p.size(); ++d)
      if (half[d] > 0.0) r = std::max(r, std::abs(p[d] - center[d]) / half[d]);
    if (r > fraction) out.push_back(p);
  }
  return out;
}

CollocationProblem make_problem(SystemPtr system, double lambda, KernelMixture kernel,
                                Points points, PenaltyConfig penalties,
                                std::optional<Vec> anchor_target) {
  if (!system) throw ContractViolation("make_problem: no system");
  if (!system->equilibrium())
    throw ContractViolation("make_problem: system '" + system->name() + "' has no equilibrium");
  CollocationProblem p;
  p.lambda = lambda;
  p.anchor_point = *system->equilibrium();
  if (anchor_target) {
    p.anchor_target = *anchor_target;
  } else {
    const auto lin = linearize(*system);
    const auto idx = lin.index_of(lambda);
    p.lambda = lin.eigenvalues[idx];
    p.anchor_target = lin.left_eigenvectors[idx];
  }
  p.system = std::move(system);
  p.kernel = std::move(kernel);
  p.penalties = penalties;
  p.trace_points = trace_points_of(points);
  p.layer_points = layer_points_of(points, penalties.layer_fraction);
  p.points = std::move(points);
  p.validate();
  return p;
}

Assembled& Assembled::operator+=(const Assembled& o) {
  B += o.B;
  G0 += o.G0;
  T += o.T;
  Y += o.Y;
  non_smooth = non_smooth || o.non_smooth;
  return *this;
}

Assembled Assembled::scaled(double s) const {
  Assembled a = *this;
  a.B *= s;
  a.G0 *= s;
  a.T *= s;
  a.Y *= s;
  return a;
}

Assembled assemble_kernel(const CollocationProblem& problem, const KernelSpec& kernel) {
  problem.validate();
  const auto& xs = problem.points;
  const auto n = static_cast<Eigen::Index>(xs.size());
  const auto dim = problem.system->dim();

  Assembled a;
  const auto blk = kernel_blocks(kernel, xs, xs);
  a.non_smooth = blk.non_smooth;
  a.B = -problem.lambda * blk.K;
  Mat F(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    F.row(i) = eval_field(*problem.system, xs[static_cast<std::size_t>(i)]).transpose();
  for (Eigen::Index d = 0; d < dim; ++d)
    a.B += F.col(d).asDiagonal() * blk.dK[static_cast<std::size_t>(d)];

  const auto anchor = kernel_blocks(kernel, Points{problem.anchor_point}, xs);
  a.G0.resize(dim, n);
  for (Eigen::Index d = 0; d < dim; ++d) a.G0.row(d) = anchor.dK[static_cast<std::size_t>(d)].row(0);

  a.T = problem.trace_points.empty() ? Mat(0, n) : kernel_matrix(kernel, problem.trace_points, xs);
  if (problem.layer_points.empty()) {
    a.Y = Mat(0, n);
  } else {
    a.Y = kernel_matrix(kernel, problem.layer_points, xs) /
          std::sqrt(static_cast<double>(problem.layer_points.size()));
  }
  return a;
}

Assembled assemble(const CollocationProblem& problem) {
  const auto& mix = problem.kernel;
  Assembled total;
  bool first = true;
  for (std::size_t l = 0; l < mix.size(); ++l) {
    const double b = mix.weights()[l];
    if (b == 0.0) continue;
    auto part = assemble_kernel(problem, mix.components()[l]);
    if (first) {
      total = part.scaled(b);
      first = false;
    } else {
      total += part.scaled(b);
    }
  }
  return total;
}

Mat normal_matrix(const Assembled& a, const PenaltyConfig& pen) {
  Mat A = a.B.transpose() * a.B / static_cast<double>(a.B.rows());
  A.diagonal().array() += pen.eta;
  if (!pen.hard_anchor) A.noalias() += pen.mu_grad * a.G0.transpose() * a.G0;
  if (pen.mu_trace > 0.0 && a.T.rows() > 0) A.noalias() += pen.mu_trace * a.T.transpose() * a.T;
  if (pen.mu_layer > 0.0 && a.Y.rows() > 0) A.noalias() += pen.mu_layer * a.Y.transpose() * a.Y;
  return A;
}

namespace {

double condition_estimate(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = ev.cwiseAbs().minCoeff();
  const double hi = ev.cwiseAbs().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

Vec cholesky_with_jitter(const Mat& A, const Vec& rhs, double* jitter_used) {
  const double scale = A.diagonal().cwiseAbs().maxCoeff();
  for (double rel : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
    Mat M = A;
    M.diagonal().array() += rel * scale;
    Eigen::LLT<Mat> llt(M);
    if (llt.info() != Eigen::Success) continue;
    Vec x = llt.solve(rhs);
    if (!x.allFinite()) continue;
    if (jitter_used) *jitter_used = rel;
    return x;
  }
  const double cond = condition_estimate(A);
  throw IllConditioned(
      fmt::format("normal equations not positive definite after jitter 1e-8 (condition ~{:.3e})",
                  cond),
      cond);
}

}  // namespace

Vec solve_coefficients(const Assembled& a, const Vec& w, const PenaltyConfig& pen,
                       double* jitter) {
  if (pen.hard_anchor) throw ContractViolation("solve_coefficients: soft anchor only");
  const Mat A = normal_matrix(a, pen);
  const Vec rhs = pen.mu_grad * (a.G0.transpose() * w);
  return cholesky_with_jitter(A, rhs, jitter);
}

RescaleResult rescale_rmse(const Vec& learned, const Vec& reference, const Vec& weights) {
  if (learned.size() != reference.size() || learned.size() == 0)
    throw ContractViolation("rescale_rmse: value lists must be nonempty and equal in length");
  Vec wt = weights;
  if (wt.size() == 0) {
    wt = Vec::Constant(learned.size(), 1.0 / static_cast<double>(learned.size()));
  } else if (wt.size() != learned.size()) {
    throw ContractViolation("rescale_rmse: weights have the wrong length");
  }
  const double ll = (wt.array() * learned.array().square()).sum();
  if (!(ll > 0.0)) throw Degenerate("learned function is identically zero");
  const double lr = (wt.array() * learned.array() * reference.array()).sum();
  const double rr = (wt.array() * reference.array().square()).sum();
  if (std::abs(lr) <= 1e-14 * std::sqrt(ll * rr))
    throw Degenerate("learned function is orthogonal to the reference (c* = 0)");
  RescaleResult r;
  r.c_star = lr / ll;
  r.rmse = std::sqrt((wt.array() * (r.c_star * learned - reference).array().square()).sum());
  return r;
}

Solution solve_assembled(const CollocationProblem& problem, const Assembled& a,
                         std::optional<ScalarFn> reference) {
  problem.validate();
  const auto& pen = problem.penalties;
  const Mat A = normal_matrix(a, pen);
  const auto n = A.rows();

  Solution s;
  if (pen.hard_anchor) {
    const auto m = a.G0.rows();
    Mat kkt = Mat::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = A;
    kkt.topRightCorner(n, m) = a.G0.transpose();
    kkt.bottomLeftCorner(m, n) = a.G0;
    Vec rhs = Vec::Zero(n + m);
    rhs.tail(m) = problem.anchor_target;
    Eigen::FullPivLU<Mat> lu(kkt);
    if (!lu.isInvertible()) {
      const double cond = condition_estimate(kkt.transpose() * kkt);
      throw IllConditioned("hard-anchor KKT system is singular", std::sqrt(cond));
    }
    s.alpha = lu.solve(rhs).head(n);
  } else {
    s.alpha = solve_coefficients(a, problem.anchor_target, pen, &s.jitter);
  }
  if (!s.alpha.allFinite()) throw IllConditioned("non-finite coefficients", std::numeric_limits<double>::infinity());

  s.kernel = problem.kernel;
  s.centers = problem.points;
  s.system = problem.system;
  s.lambda = problem.lambda;
  s.non_smooth = a.non_smooth;
  s.residual_norm = (a.B * s.alpha).norm() / std::sqrt(static_cast<double>(a.B.rows()));
  s.derivative_at_anchor = a.G0 * s.alpha;
  s.anchor_error = (s.derivative_at_anchor - problem.anchor_target).norm();

  if (!reference) {
    if (const auto* ref = problem.system->reference_for(problem.lambda)) reference = ref->phi;
  }
  if (reference) {
    const Vec learned = evaluate(s, problem.points);
    const Vec truth = evaluate_on(*reference, problem.points);
    s.rmse_raw = std::sqrt((learned - truth).squaredNorm() / static_cast<double>(truth.size()));
    const auto r = rescale_rmse(learned, truth);
    s.rmse_rescaled = r.rmse;
    s.rescale_factor = r.c_star;
  }
  return s;
}

Solution solve(const CollocationProblem& problem, std::optional<ScalarFn> reference) {
  return solve_assembled(problem, assemble(problem), std::move(reference));
}

Vec evaluate(const Solution& s, const Points& probes) {
  Mat K = Mat::Zero(static_cast<Eigen::Index>(probes.size()), s.alpha.size());
  const auto& mix = s.kernel;
  for (std::size_t l = 0; l < mix.size(); ++l)
    if (mix.weights()[l] != 0.0)
      K += mix.weights()[l] * kernel_matrix(mix.components()[l], probes, s.centers);
  return K * s.alpha;
}

double evaluate_at(const Solution& s, const Vec& x) { return evaluate(s, Points{x})[0]; }

Vec gradient_at(const Solution& s, const Vec& x) {
  const auto blk = mixture_blocks(s.kernel, Points{x}, s.centers);
  Vec g(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d)
    g[d] = blk.dK[static_cast<std::size_t>(d)].row(0).dot(s.alpha);
  return g;
}

Vec residual_field(const Solution& s, const Points& probes) {
  const auto blk = mixture_blocks(s.kernel, probes, s.centers);
  Vec phi = blk.K * s.alpha;
  Vec out(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const Vec f = eval_field(*s.system, probes[static_cast<std::size_t>(i)]);
    double fg = 0.0;
    for (Eigen::Index d = 0; d < f.size(); ++d)
      fg += f[d] * blk.dK[static_cast<std::size_t>(d)].row(i).dot(s.alpha);
    out[i] = fg - s.lambda * phi[i];
  }
  return out;
}

}  // namespace koopkern
