#include "koopkern/lbfgs.hpp"

#include "koopkern/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace koopkern {

namespace {

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& fn, Vec x0, const LbfgsOptions& opts) {
  LbfgsResult r;
  r.x = std::move(x0);
  r.gradient = Vec::Zero(r.x.size());
  r.f = fn(r.x, r.gradient);
  if (!std::isfinite(r.f) || !r.gradient.allFinite())
    throw Divergence("lbfgs: objective is not finite at the starting point");
  r.loss_trace.push_back(r.f);
  r.x_trace.push_back(r.x);

  std::deque<Vec> s_hist;
  std::deque<Vec> y_hist;
  std::deque<double> rho_hist;

  for (;;) {
    if (r.gradient.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
      r.converged = true;
      r.stop_reason = "gradient";
      break;
    }
    if (r.iterations >= opts.max_iterations) {
      r.stop_reason = "max_iterations";
      break;
    }

    // Two-loop recursion.
    Vec q = r.gradient;
    std::vector<double> a(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      a[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= a[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, r.gradient.lpNorm<Eigen::Infinity>());
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double b = rho_hist[k] * y_hist[k].dot(q);
      q += (a[k] - b) * s_hist[k];
    }
    Vec dir = -q;
    double slope = r.gradient.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -r.gradient / std::max(1.0, r.gradient.lpNorm<Eigen::Infinity>());
      slope = r.gradient.dot(dir);
    }

    double step = 1.0;
    bool accepted = false;
    bool any_finite = false;
    Vec x_new;
    Vec g_new(r.x.size());
    double f_new = 0.0;
    for (int bt = 0; bt < opts.max_backtracks; ++bt, step *= 0.5) {
      x_new = r.x + step * dir;
      f_new = fn(x_new, g_new);
      if (!std::isfinite(f_new) || !g_new.allFinite()) continue;
      any_finite = true;
      if (f_new <= r.f + opts.armijo * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!any_finite)
        throw Divergence("lbfgs: objective became non-finite along the search direction",
                         to_std(r.x));
      r.stop_reason = "line_search";
      break;
    }

    const Vec s = x_new - r.x;
    const Vec y = g_new - r.gradient;
    const double f_old = r.f;
    r.x = std::move(x_new);
    r.f = f_new;
    r.gradient = g_new;
    ++r.iterations;
    r.loss_trace.push_back(r.f);
    r.x_trace.push_back(r.x);

    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (f_old - r.f <= opts.function_tolerance * std::max({std::abs(f_old), std::abs(r.f), 1e-300})) {
      r.converged = true;
      r.stop_reason = "function";
      break;
    }
  }
  return r;
}

}  // namespace koopkern
