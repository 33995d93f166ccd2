#include "koopkern/kernel_bank.hpp"

#include "koopkern/errors.hpp"
#include "koopkern/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>
#include <algorithm>
#include <optional>

namespace koopkern {

const char* to_string(KernelFamily f) noexcept {
  switch (f) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::laplacian: return "laplacian";
    case KernelFamily::cauchy: return "cauchy";
    case KernelFamily::triangular: return "triangular";
    case KernelFamily::sigmoid: return "sigmoid";
    case KernelFamily::inverse_quadratic: return "inverse_quadratic";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::singular_1d: return "singular_1d";
    case KernelFamily::rank_one: return "rank_one";
  }
  return "unknown";
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ContractViolation(fmt::format("kernel: {} must be positive, got {}", what, v));
}

void require_same_dim(const Vec& x, const Vec& y) {
  if (x.size() != y.size())
    throw ContractViolation(fmt::format(
        "kernel: arguments have dimensions {} and {}", x.size(), y.size()));
}

double singular_factor(double x) {
  const double s = 1.0 - x * x;
  if (!(s > 0.0))
    throw DomainError(fmt::format("singular_1d: |x| must be < 1, got {}", x));
  return std::sqrt(s);
}

}  // namespace

KernelSpec::KernelSpec(KernelFamily family, double a, double b, int degree)
    : family_(family), a_(a), b_(b), degree_(degree) {}

KernelSpec KernelSpec::gaussian(double gamma) {
  require_positive(gamma, "gamma");
  return {KernelFamily::gaussian, gamma, 0.0, 0};
}

KernelSpec KernelSpec::gaussian_length(double ell) {
  require_positive(ell, "length scale");
  KernelSpec k = gaussian(1.0 / (2.0 * ell * ell));
  k.ell_ = ell;
  return k;
}

KernelSpec KernelSpec::exponential(double gamma) {
  require_positive(gamma, "gamma");
  return {KernelFamily::exponential, gamma, 0.0, 0};
}

KernelSpec KernelSpec::laplacian(double gamma) {
  require_positive(gamma, "gamma");
  return {KernelFamily::laplacian, gamma, 0.0, 0};
}

KernelSpec KernelSpec::cauchy(double gamma) {
  require_positive(gamma, "gamma");
  return {KernelFamily::cauchy, gamma, 0.0, 0};
}

KernelSpec KernelSpec::triangular(double sigma) {
  require_positive(sigma, "sigma");
  return {KernelFamily::triangular, sigma, 0.0, 0};
}

KernelSpec KernelSpec::sigmoid(double gamma, double coef0) {
  require_positive(gamma, "gamma");
  if (!std::isfinite(coef0)) throw ContractViolation("sigmoid: coef0 must be finite");
  return {KernelFamily::sigmoid, gamma, coef0, 0};
}

KernelSpec KernelSpec::inverse_quadratic(double gamma) {
  require_positive(gamma, "gamma");
  return {KernelFamily::inverse_quadratic, gamma, 0.0, 0};
}

KernelSpec KernelSpec::polynomial(int degree, double coef0) {
  if (degree < 1)
    throw ContractViolation(fmt::format("polynomial: degree must be >= 1, got {}", degree));
  if (!(coef0 >= 0.0) || !std::isfinite(coef0))
    throw ContractViolation(fmt::format("polynomial: coef0 must be >= 0, got {}", coef0));
  return {KernelFamily::polynomial, 0.0, coef0, degree};
}

KernelSpec KernelSpec::singular_1d() { return {KernelFamily::singular_1d, 0.0, 0.0, 0}; }

KernelSpec KernelSpec::rank_one(std::shared_ptr<const RankOneFeature> feature) {
  if (!feature || !feature->value || !feature->gradient)
    throw ContractViolation("rank_one: feature and its gradient are required");
  KernelSpec k{KernelFamily::rank_one, 0.0, 0.0, 0};
  k.feature_ = std::move(feature);
  return k;
}

KernelSpec KernelSpec::from_params(const std::string& family,
                                   const std::map<std::string, double>& params) {
  std::map<std::string, double> rest = params;
  auto take = [&](const char* key) -> std::optional<double> {
    auto it = rest.find(key);
    if (it == rest.end()) return std::nullopt;
    const double v = it->second;
    rest.erase(it);
    return v;
  };
  auto need = [&](const char* key) {
    auto v = take(key);
    if (!v)
      throw ContractViolation(
          fmt::format("kernel '{}' needs parameter '{}'", family, key));
    return *v;
  };

  std::optional<KernelSpec> spec;
  if (family == "gaussian") {
    auto ell = take("ell");
    auto gamma = take("gamma");
    if (ell && gamma)
      throw ContractViolation("gaussian: give either 'ell' or 'gamma', not both");
    if (ell)
      spec = gaussian_length(*ell);
    else if (gamma)
      spec = gaussian(*gamma);
    else
      throw ContractViolation("gaussian: needs 'ell' or 'gamma'");
  } else if (family == "exponential") {
    spec = exponential(need("gamma"));
  } else if (family == "laplacian") {
    spec = laplacian(need("gamma"));
  } else if (family == "cauchy") {
    spec = cauchy(need("gamma"));
  } else if (family == "triangular") {
    spec = triangular(need("sigma"));
  } else if (family == "sigmoid") {
    const double g = need("gamma");
    spec = sigmoid(g, take("coef0").value_or(0.0));
  } else if (family == "inverse_quadratic") {
    spec = inverse_quadratic(need("gamma"));
  } else if (family == "polynomial") {
    const double d = need("degree");
    if (d != std::round(d))
      throw ContractViolation("polynomial: degree must be an integer");
    spec = polynomial(static_cast<int>(d), take("coef0").value_or(1.0));
  } else if (family == "singular_1d") {
    spec = singular_1d();
  } else if (family == "rank_one") {
    throw ContractViolation("rank_one kernels are built from a path-integral coordinate");
  } else {
    throw ContractViolation("unknown kernel family '" + family + "'");
  }
  if (!rest.empty())
    throw ContractViolation(fmt::format("kernel '{}' has no parameter '{}'",
                                        family, rest.begin()->first));
  return *spec;
}

std::string KernelSpec::name() const {
  if (family_ == KernelFamily::polynomial) return fmt::format("poly{}", degree_);
  return to_string(family_);
}

std::map<std::string, double> KernelSpec::params() const {
  switch (family_) {
    case KernelFamily::gaussian:
      if (from_length_scale()) return {{"ell", ell_}};
      return {{"gamma", a_}};
    case KernelFamily::exponential:
    case KernelFamily::laplacian:
    case KernelFamily::cauchy:
    case KernelFamily::inverse_quadratic:
      return {{"gamma", a_}};
    case KernelFamily::triangular: return {{"sigma", a_}};
    case KernelFamily::sigmoid: return {{"gamma", a_}, {"coef0", b_}};
    case KernelFamily::polynomial:
      return {{"degree", static_cast<double>(degree_)}, {"coef0", b_}};
    case KernelFamily::singular_1d:
    case KernelFamily::rank_one:
      return {};
  }
  return {};
}

std::string KernelSpec::describe() const {
  switch (family_) {
    case KernelFamily::gaussian:
      if (from_length_scale())
        return fmt::format("gaussian(ell={},gamma={})", ell_, a_);
      return fmt::format("gaussian(gamma={})", a_);
    case KernelFamily::exponential:
    case KernelFamily::laplacian:
    case KernelFamily::cauchy:
    case KernelFamily::inverse_quadratic:
      return fmt::format("{}(gamma={})", to_string(family_), a_);
    case KernelFamily::triangular: return fmt::format("triangular(sigma={})", a_);
    case KernelFamily::sigmoid: return fmt::format("sigmoid(gamma={},coef0={})", a_, b_);
    case KernelFamily::polynomial:
      return fmt::format("polynomial(degree={},coef0={})", degree_, b_);
    case KernelFamily::singular_1d: return "singular_1d";
    case KernelFamily::rank_one: return fmt::format("rank_one({})", feature_->label);
  }
  return "unknown";
}

double eval_kernel(const KernelSpec& spec, const Vec& x, const Vec& y) {
  require_same_dim(x, y);
  switch (spec.family()) {
    case KernelFamily::gaussian:
      return std::exp(-spec.gamma() * (x - y).squaredNorm());
    case KernelFamily::exponential:
    case KernelFamily::laplacian:
      return std::exp(-spec.gamma() * (x - y).norm());
    case KernelFamily::cauchy:
    case KernelFamily::inverse_quadratic:
      return 1.0 / (1.0 + spec.gamma() * (x - y).squaredNorm());
    case KernelFamily::triangular:
      return std::max(0.0, 1.0 - (x - y).norm() / spec.sigma());
    case KernelFamily::sigmoid:
      return std::tanh(spec.gamma() * x.dot(y) + spec.coef0());
    case KernelFamily::polynomial:
      return std::pow(x.dot(y) + spec.coef0(), spec.degree());
    case KernelFamily::singular_1d:
      if (x.size() != 1) throw ContractViolation("singular_1d is one-dimensional");
      return x[0] * y[0] / (singular_factor(x[0]) * singular_factor(y[0]));
    case KernelFamily::rank_one:
      return spec.feature()->value(x) * spec.feature()->value(y);
  }
  return 0.0;
}

KernelGradient eval_kernel_grad_x(const KernelSpec& spec, const Vec& x, const Vec& y) {
  require_same_dim(x, y);
  KernelGradient g{Vec::Zero(x.size()), false};
  const Vec d = x - y;
  switch (spec.family()) {
    case KernelFamily::gaussian:
      g.value = -2.0 * spec.gamma() * std::exp(-spec.gamma() * d.squaredNorm()) * d;
      break;
    case KernelFamily::exponential:
    case KernelFamily::laplacian: {
      const double r = d.norm();
      if (r == 0.0) {
        g.non_smooth = true;
        break;
      }
      g.value = -spec.gamma() * std::exp(-spec.gamma() * r) / r * d;
      break;
    }
    case KernelFamily::cauchy:
    case KernelFamily::inverse_quadratic: {
      const double q = 1.0 + spec.gamma() * d.squaredNorm();
      g.value = -2.0 * spec.gamma() / (q * q) * d;
      break;
    }
    case KernelFamily::triangular: {
      const double r = d.norm();
      if (r == 0.0) {
        g.non_smooth = true;
      } else if (r <= spec.sigma()) {
        g.value = -d / (r * spec.sigma());
        g.non_smooth = r == spec.sigma();
      }
      break;
    }
    case KernelFamily::sigmoid: {
      const double t = std::tanh(spec.gamma() * x.dot(y) + spec.coef0());
      g.value = spec.gamma() * (1.0 - t * t) * y;
      break;
    }
    case KernelFamily::polynomial:
      g.value = spec.degree() * std::pow(x.dot(y) + spec.coef0(), spec.degree() - 1) * y;
      break;
    case KernelFamily::singular_1d: {
      if (x.size() != 1) throw ContractViolation("singular_1d is one-dimensional");
      const double sx = singular_factor(x[0]);
      g.value[0] = y[0] / singular_factor(y[0]) / (sx * sx * sx);
      break;
    }
    case KernelFamily::rank_one:
      g.value = spec.feature()->value(y) * spec.feature()->gradient(x);
      break;
  }
  return g;
}

namespace {

template <class Fn>
auto at_pair(std::size_t i, std::size_t j, Fn&& fn) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw DomainError(fmt::format("{} (points {}, {})", e.what(), i, j));
  }
}

}  // namespace

GramMatrix gram(const KernelSpec& spec, const Points& points) {
  const auto n = points.size();
  Mat K(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (spec.family() == KernelFamily::rank_one) {
    Vec xi(static_cast<Eigen::Index>(n));
    parallel_for(n, [&](std::size_t i) {
      xi[static_cast<Eigen::Index>(i)] =
          at_pair(i, i, [&] { return spec.feature()->value(points[i]); });
    });
    K = xi * xi.transpose();
  } else {
    parallel_for(n, [&](std::size_t i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (std::size_t j = 0; j <= i; ++j) {
        const double v =
            at_pair(i, j, [&] { return eval_kernel(spec, points[i], points[j]); });
        K(ii, static_cast<Eigen::Index>(j)) = v;
        K(static_cast<Eigen::Index>(j), ii) = v;
      }
    });
  }
  return {std::move(K), points, spec};
}

Mat with_jitter(const GramMatrix& g, double rel) {
  const double scale = g.values.size() ? g.values.diagonal().cwiseAbs().maxCoeff() : 0.0;
  Mat out = g.values;
  out.diagonal().array() += rel * scale;
  return out;
}

double min_eigenvalue(const Mat& symmetric) {
  if (symmetric.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

PsdReport psd_check(const GramMatrix& g) {
  PsdReport r;
  r.max_diagonal = g.values.size() ? g.values.diagonal().maxCoeff() : 0.0;
  r.min_eigenvalue = min_eigenvalue(g.values);
  if (!g.spec.positive_definite_family()) {
    r.note = "indefinite family, PSD check skipped";
    return r;
  }
  r.checked = true;
  r.passed = r.min_eigenvalue >= -1e-8 * r.max_diagonal;
  if (!r.passed)
    r.note = fmt::format("min eigenvalue {} below -1e-8 * max diag", r.min_eigenvalue);
  return r;
}

Mat kernel_matrix(const KernelSpec& spec, const Points& xs, const Points& ys) {
  const auto nx = static_cast<Eigen::Index>(xs.size());
  const auto ny = static_cast<Eigen::Index>(ys.size());
  if (spec.family() == KernelFamily::rank_one) {
    Vec a(nx), b(ny);
    for (Eigen::Index i = 0; i < nx; ++i)
      a[i] = spec.feature()->value(xs[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < ny; ++j)
      b[j] = spec.feature()->value(ys[static_cast<std::size_t>(j)]);
    return a * b.transpose();
  }
  Mat K(nx, ny);
  parallel_for(xs.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < ys.size(); ++j)
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          at_pair(i, j, [&] { return eval_kernel(spec, xs[i], ys[j]); });
  });
  return K;
}

KernelBlocks kernel_blocks(const KernelSpec& spec, const Points& xs, const Points& ys) {
  const auto nx = static_cast<Eigen::Index>(xs.size());
  const auto ny = static_cast<Eigen::Index>(ys.size());
  const auto dim = xs.empty() ? Eigen::Index{0} : xs.front().size();
  KernelBlocks out;
  out.dK.assign(static_cast<std::size_t>(dim), Mat(nx, ny));

  if (spec.family() == KernelFamily::rank_one) {
    // xi and its gradient once per point instead of once per pair.
    const auto& feat = *spec.feature();
    Vec a(nx), b(ny);
    Mat ga(nx, dim);
    parallel_for(xs.size(), [&](std::size_t i) {
      const auto ii = static_cast<Eigen::Index>(i);
      a[ii] = feat.value(xs[i]);
      ga.row(ii) = feat.gradient(xs[i]).transpose();
    });
    parallel_for(ys.size(), [&](std::size_t j) {
      b[static_cast<Eigen::Index>(j)] = feat.value(ys[j]);
    });
    out.K = a * b.transpose();
    for (Eigen::Index d = 0; d < dim; ++d)
      out.dK[static_cast<std::size_t>(d)] = ga.col(d) * b.transpose();
    return out;
  }

  out.K.resize(nx, ny);
  std::vector<char> kinks(xs.size(), 0);
  parallel_for(xs.size(), [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      out.K(ii, jj) = at_pair(i, j, [&] { return eval_kernel(spec, xs[i], ys[j]); });
      const auto g = at_pair(i, j, [&] { return eval_kernel_grad_x(spec, xs[i], ys[j]); });
      for (Eigen::Index d = 0; d < dim; ++d)
        out.dK[static_cast<std::size_t>(d)](ii, jj) = g.value[d];
      if (g.non_smooth) kinks[i] = 1;
    }
  });
  out.non_smooth = std::any_of(kinks.begin(), kinks.end(), [](char c) { return c != 0; });
  return out;
}

KernelMixture::KernelMixture(std::vector<KernelSpec> components, std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) throw ContractViolation("KernelMixture: no components");
  if (components_.size() != weights_.size())
    throw ContractViolation("KernelMixture: one weight per component required");
  double sum = 0.0;
  for (double b : weights_) {
    if (!(b >= 0.0) || !std::isfinite(b))
      throw ContractViolation(fmt::format("KernelMixture: weight {} is not >= 0", b));
    sum += b;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ContractViolation(fmt::format("KernelMixture: weights sum to {}, not 1", sum));
}

KernelMixture KernelMixture::single(KernelSpec spec) {
  return KernelMixture({std::move(spec)}, {1.0});
}

KernelMixture KernelMixture::uniform(std::vector<KernelSpec> components) {
  const auto n = components.size();
  if (n == 0) throw ContractViolation("KernelMixture: no components");
  return KernelMixture(std::move(components),
                       std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

bool KernelMixture::positive_definite() const noexcept {
  for (std::size_t l = 0; l < components_.size(); ++l)
    if (weights_[l] > 0.0 && !components_[l].positive_definite_family()) return false;
  return true;
}

std::string KernelMixture::describe() const {
  if (components_.size() == 1) return components_.front().describe();
  std::string out;
  for (std::size_t l = 0; l < components_.size(); ++l)
    out += fmt::format("{}{}*{}", l ? "+" : "", weights_[l], components_[l].describe());
  return out;
}

double mixture_eval(const KernelMixture& mix, const Vec& x, const Vec& y) {
  double v = 0.0;
  for (std::size_t l = 0; l < mix.size(); ++l)
    if (mix.weights()[l] != 0.0)
      v += mix.weights()[l] * eval_kernel(mix.components()[l], x, y);
  return v;
}

KernelGradient mixture_grad_x(const KernelMixture& mix, const Vec& x, const Vec& y) {
  KernelGradient g{Vec::Zero(x.size()), false};
  for (std::size_t l = 0; l < mix.size(); ++l) {
    if (mix.weights()[l] == 0.0) continue;
    const auto c = eval_kernel_grad_x(mix.components()[l], x, y);
    g.value += mix.weights()[l] * c.value;
    g.non_smooth = g.non_smooth || c.non_smooth;
  }
  return g;
}

Mat mixture_gram(const KernelMixture& mix, const Points& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Mat K = Mat::Zero(n, n);
  for (std::size_t l = 0; l < mix.size(); ++l)
    if (mix.weights()[l] != 0.0)
      K += mix.weights()[l] * gram(mix.components()[l], points).values;
  return K;
}

KernelBlocks mixture_blocks(const KernelMixture& mix, const Points& xs, const Points& ys) {
  const auto nx = static_cast<Eigen::Index>(xs.size());
  const auto ny = static_cast<Eigen::Index>(ys.size());
  const auto dim = xs.empty() ? Eigen::Index{0} : xs.front().size();
  KernelBlocks out;
  out.K = Mat::Zero(nx, ny);
  out.dK.assign(static_cast<std::size_t>(dim), Mat::Zero(nx, ny));
  for (std::size_t l = 0; l < mix.size(); ++l) {
    const double b = mix.weights()[l];
    if (b == 0.0) continue;
    const auto blk = kernel_blocks(mix.components()[l], xs, ys);
    out.K += b * blk.K;
    for (std::size_t d = 0; d < out.dK.size(); ++d) out.dK[d] += b * blk.dK[d];
    out.non_smooth = out.non_smooth || blk.non_smooth;
  }
  return out;
}

std::vector<KernelSpec> default_mkl_kernels() {
  std::vector<KernelSpec> ks{
      KernelSpec::gaussian(1.0),       KernelSpec::exponential(1.0),
      KernelSpec::cauchy(1.0),         KernelSpec::triangular(2.0),
      KernelSpec::sigmoid(0.5, 0.0),   KernelSpec::inverse_quadratic(1.0),
  };
  for (int d = 2; d <= 6; ++d) ks.push_back(KernelSpec::polynomial(d, 1.0));
  return ks;
}

}  // namespace koopkern
