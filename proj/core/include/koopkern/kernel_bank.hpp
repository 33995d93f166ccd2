#pragma once

// Base kernels with analytic first-argument gradients, Gram assembly and
// convex mixtures.

#include "koopkern/linalg.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace koopkern {

enum class KernelFamily {
  gaussian,
  exponential,
  laplacian,
  cauchy,
  triangular,
  sigmoid,
  inverse_quadratic,
  polynomial,
  singular_1d,
  rank_one,
};

[[nodiscard]] const char* to_string(KernelFamily f) noexcept;

/// Scalar feature xi with its gradient; K(x, y) = xi(x) xi(y).
struct RankOneFeature {
  ScalarFn value;
  std::function<Vec(const Vec&)> gradient;
  std::string label = "xi";
};

class KernelSpec {
 public:
  /// exp(-gamma r^2).
  static KernelSpec gaussian(double gamma);
  /// exp(-r^2 / (2 ell^2)); stored as gamma = 1 / (2 ell^2).
  static KernelSpec gaussian_length(double ell);
  /// exp(-gamma r).
  static KernelSpec exponential(double gamma);
  /// Same formula as exponential, kept as a separate tag.
  static KernelSpec laplacian(double gamma);
  /// 1 / (1 + gamma r^2).
  static KernelSpec cauchy(double gamma);
  /// max(0, 1 - r / sigma).
  static KernelSpec triangular(double sigma);
  /// tanh(gamma x.y + coef0). Indefinite.
  static KernelSpec sigmoid(double gamma, double coef0);
  /// 1 / (1 + gamma r^2).
  static KernelSpec inverse_quadratic(double gamma);
  /// (x.y + coef0)^degree. Degrees above 6 set the high_degree flag.
  static KernelSpec polynomial(int degree, double coef0);
  /// x y / sqrt((1 - x^2)(1 - y^2)) on (-1, 1).
  static KernelSpec singular_1d();
  static KernelSpec rank_one(std::shared_ptr<const RankOneFeature> feature);

  /// Builds a spec from a family tag and named hyperparameters, e.g.
  /// ("gaussian", {{"ell", 0.3}}) or ("polynomial", {{"degree", 2},
  /// {"coef0", 0.5}}). rank_one cannot be built this way.
  static KernelSpec from_params(const std::string& family,
                                const std::map<std::string, double>& params);

  [[nodiscard]] KernelFamily family() const noexcept { return family_; }
  [[nodiscard]] double gamma() const noexcept { return a_; }
  [[nodiscard]] double sigma() const noexcept { return a_; }
  [[nodiscard]] double coef0() const noexcept { return b_; }
  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] bool high_degree() const noexcept { return degree_ > 6; }
  [[nodiscard]] bool from_length_scale() const noexcept { return ell_ > 0.0; }
  [[nodiscard]] double length_scale() const noexcept { return ell_; }
  [[nodiscard]] const RankOneFeature* feature() const noexcept {
    return feature_.get();
  }

  /// True when Gram matrices are positive semidefinite in exact arithmetic.
  [[nodiscard]] bool positive_definite_family() const noexcept {
    return family_ != KernelFamily::sigmoid;
  }

  /// Short name, e.g. "gaussian" or "poly3".
  [[nodiscard]] std::string name() const;
  /// Name plus hyperparameters, e.g. "gaussian(gamma=5.5555555555555554)".
  [[nodiscard]] std::string describe() const;
  /// Hyperparameters as written in config files.
  [[nodiscard]] std::map<std::string, double> params() const;

 private:
  KernelSpec(KernelFamily family, double a, double b, int degree);

  KernelFamily family_;
  double a_ = 0.0;
  double b_ = 0.0;
  int degree_ = 0;
  double ell_ = 0.0;
  std::shared_ptr<const RankOneFeature> feature_;
};

/// Gradient with respect to the first argument. non_smooth marks points on a
/// kink (r = 0 for exponential and triangular, r = sigma for triangular)
/// where a one-sided value is returned.
struct KernelGradient {
  Vec value;
  bool non_smooth = false;
};

[[nodiscard]] double eval_kernel(const KernelSpec& spec, const Vec& x,
                                 const Vec& y);
[[nodiscard]] KernelGradient eval_kernel_grad_x(const KernelSpec& spec,
                                                const Vec& x, const Vec& y);

struct GramMatrix {
  Mat values;
  Points points;
  KernelSpec spec;
};

/// K_ij = k(x_i, x_j). Domain errors name the offending index pair.
[[nodiscard]] GramMatrix gram(const KernelSpec& spec, const Points& points);

/// values + rel * max(diag) * I.
[[nodiscard]] Mat with_jitter(const GramMatrix& g, double rel = 1e-10);

/// Smallest eigenvalue of a symmetric matrix.
[[nodiscard]] double min_eigenvalue(const Mat& symmetric);

struct PsdReport {
  double min_eigenvalue = 0.0;
  double max_diagonal = 0.0;
  bool checked = false;  ///< false for indefinite families
  bool passed = true;
  std::string note;
};

/// min eigenvalue >= -1e-8 * max diag; skipped for sigmoid.
[[nodiscard]] PsdReport psd_check(const GramMatrix& g);

/// Kernel values and first-argument gradients between two point sets:
/// K(i, j) = k(x_i, y_j), dK[d](i, j) = d/dx_d k(x_i, y_j).
struct KernelBlocks {
  Mat K;
  std::vector<Mat> dK;
  bool non_smooth = false;
};

[[nodiscard]] Mat kernel_matrix(const KernelSpec& spec, const Points& xs,
                                const Points& ys);
[[nodiscard]] KernelBlocks kernel_blocks(const KernelSpec& spec,
                                         const Points& xs, const Points& ys);

class KernelMixture {
 public:
  /// Throws ContractViolation unless weights are nonnegative, match the
  /// component count and sum to 1 within 1e-12.
  KernelMixture(std::vector<KernelSpec> components, std::vector<double> weights);

  static KernelMixture single(KernelSpec spec);
  static KernelMixture uniform(std::vector<KernelSpec> components);

  [[nodiscard]] const std::vector<KernelSpec>& components() const noexcept {
    return components_;
  }
  [[nodiscard]] const std::vector<double>& weights() const noexcept {
    return weights_;
  }
  [[nodiscard]] std::size_t size() const noexcept { return components_.size(); }
  [[nodiscard]] bool positive_definite() const noexcept;
  [[nodiscard]] std::string describe() const;

 private:
  std::vector<KernelSpec> components_;
  std::vector<double> weights_;
};

[[nodiscard]] double mixture_eval(const KernelMixture& mix, const Vec& x,
                                  const Vec& y);
[[nodiscard]] KernelGradient mixture_grad_x(const KernelMixture& mix,
                                            const Vec& x, const Vec& y);
[[nodiscard]] Mat mixture_gram(const KernelMixture& mix, const Points& points);
[[nodiscard]] KernelBlocks mixture_blocks(const KernelMixture& mix,
                                          const Points& xs, const Points& ys);

/// Default MKL dictionary: 11 base kernels with fixed hyperparameters.
[[nodiscard]] std::vector<KernelSpec> default_mkl_kernels();

}  // namespace koopkern
