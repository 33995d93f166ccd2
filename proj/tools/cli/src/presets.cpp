#include "koopkern/cli/config.hpp"

#include <fmt/format.h>

namespace koopkern::cli {

namespace {

ExperimentConfig cubic1d(std::string name, std::string kernel) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.kind = "solve";
  c.system = "cubic1d";
  c.lambda = 1.0;
  c.kernel = std::move(kernel);
  c.lower = {-0.99};
  c.upper = {0.99};
  c.counts = {199};
  c.mu_trace = 1e2;
  c.mu_layer = 1e2;
  return c;
}

ExperimentConfig poly2d(std::string name, std::string kind, double lambda) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.kind = std::move(kind);
  c.system = "poly2d";
  c.system_params = {{"lambda1", -1.0}, {"lambda2", 3.0}};
  c.lambda = lambda;
  c.lower = {-1.0, -1.0};
  c.upper = {1.0, 1.0};
  c.counts = {21, 21};
  return c;
}

ExperimentConfig poly2d_mkl(std::string name, double lambda) {
  auto c = poly2d(std::move(name), "mkl", lambda);
  for (const auto& k : default_mkl_kernels()) c.mkl_kernels.push_back(kernel_string(k));
  c.lambda_l1 = 0.0;
  c.tau = 0.1;
  return c;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "cubic1d_singular", "cubic1d_rbf",     "poly2d_kernel_study", "poly2d_mkl_l1",
      "poly2d_mkl_l2eig", "duffing_char",    "unify_advection",
  };
  return names;
}

ExperimentConfig preset(const std::string& name) {
  if (name == "cubic1d_singular") return cubic1d(name, "singular_1d");
  if (name == "cubic1d_rbf") return cubic1d(name, "gaussian(ell=0.3)");
  if (name == "poly2d_kernel_study") {
    auto c = poly2d(name, "solve", -1.0);
    c.kernel = "polynomial(degree=2,coef0=0.5)";
    c.compare_kernels = {
        "polynomial(degree=3,coef0=0.5)", "polynomial(degree=4,coef0=1.5)",
        "gaussian(gamma=1)",              "gaussian(gamma=0.775)",
        "gaussian(gamma=0.1)",
    };
    return c;
  }
  if (name == "poly2d_mkl_l1") return poly2d_mkl(name, -1.0);
  if (name == "poly2d_mkl_l2eig") return poly2d_mkl(name, 3.0);
  if (name == "duffing_char") {
    ExperimentConfig c;
    c.name = name;
    c.kind = "path-integral";
    c.system = "duffing";
    c.system_params = {{"delta", 0.5}, {"beta", -1.0}, {"alpha", 1.0}};
    c.eigen_index = 0;  // lambda_+ > 0, forward integration
    c.kernel = "gaussian(gamma=1)";
    c.lower = {-2.0, -2.0};
    c.upper = {2.0, 2.0};
    c.counts = {25, 25};
    c.pi_T = 10.0;
    c.pi_M = 2000;
    return c;
  }
  if (name == "unify_advection") {
    ExperimentConfig c;
    c.name = name;
    c.kind = "unify";
    c.system = "advection1d";
    c.system_params = {{"c", 1.0}};
    c.lower = {-5.0};
    c.upper = {5.0};
    c.counts = {20};
    c.unify_c = 1.0;
    c.unify_lambda = 1.0;
    c.unify_a = -30.0;
    c.unify_lo = -5.0;
    c.unify_hi = 5.0;
    c.unify_n = 20;
    c.quad_panels = 40;
    c.quad_order = 8;
    return c;
  }
  throw ConfigError(fmt::format("unknown preset '{}'", name));
}

}  // namespace koopkern::cli
