#include "koopkern/parallel.hpp"

#include "koopkern/linalg.hpp"
#include "koopkern/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace koopkern {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

int num_threads() noexcept { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const auto workers =
      static_cast<std::size_t>(std::min<std::size_t>(num_threads(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  // Static block partition keeps the work assignment reproducible.
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> first_failure(workers, n);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        for (std::size_t i = begin; i < end; ++i) {
          try {
            body(i);
          } catch (...) {
            errors[w] = std::current_exception();
            first_failure[w] = i;
            return;
          }
        }
      });
    }
  }
  const auto it = std::min_element(first_failure.begin(), first_failure.end());
  if (*it < n) std::rethrow_exception(errors[it - first_failure.begin()]);
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ContractViolation("linspace: n must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

Points tensor_grid(const Vec& lower, const Vec& upper,
                   const std::vector<int>& counts) {
  const auto dim = static_cast<std::size_t>(lower.size());
  if (upper.size() != lower.size() || counts.size() != dim || dim == 0)
    throw ContractViolation("tensor_grid: bounds and counts must agree");

  std::vector<std::vector<double>> axes;
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    axes.push_back(linspace(lower[static_cast<Eigen::Index>(d)],
                            upper[static_cast<Eigen::Index>(d)], counts[d]));
    total *= axes.back().size();
  }

  Points points;
  points.reserve(total);
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t k = 0; k < total; ++k) {
    Vec p(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d)
      p[static_cast<Eigen::Index>(d)] = axes[d][idx[d]];
    points.push_back(std::move(p));
    for (std::size_t d = dim; d-- > 0;) {
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
    }
  }
  return points;
}

Vec evaluate_on(const ScalarFn& fn, const Points& points) {
  Vec out(static_cast<Eigen::Index>(points.size()));
  parallel_for(points.size(), [&](std::size_t i) {
    out[static_cast<Eigen::Index>(i)] = fn(points[i]);
  });
  return out;
}

}  // namespace koopkern
