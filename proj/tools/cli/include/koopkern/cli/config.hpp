#pragma once

// Experiment configuration: an INI file with flat sections.

#include "koopkern/kernel_bank.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace koopkern::cli {

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
  // [experiment]
  std::string name = "experiment";
  std::string kind = "solve";  ///< solve | mkl | path-integral | mercer | unify
  std::uint64_t seed = 0;

  // [system]; every key other than `name` is a parameter override.
  std::string system = "poly2d";
  std::map<std::string, double> system_params;

  // [eigen]: explicit lambda, or an index into the descending spectrum.
  std::optional<double> lambda;
  int eigen_index = 0;

  // [kernel]
  std::string kernel = "gaussian(gamma=1)";
  std::vector<std::string> compare_kernels;
  /// Optional fixed mixture; when nonempty it replaces `kernel` in solve.
  std::vector<std::string> mixture_kernels;
  std::vector<double> mixture_weights;

  // [grid]
  std::vector<double> lower{-1.0, -1.0};
  std::vector<double> upper{1.0, 1.0};
  std::vector<int> counts{21, 21};

  // [penalties]
  double eta = 1e-8;
  double mu_grad = 1e4;
  double mu_trace = 0.0;
  double mu_layer = 0.0;
  double layer_fraction = 0.9;
  bool hard_anchor = false;

  // [path_integral]
  double pi_T = 10.0;
  int pi_M = 2000;
  double escape_radius = 1e6;

  // [mkl]
  std::vector<std::string> mkl_kernels;
  double lambda_l1 = 0.0;
  double tau = 0.1;
  int max_iterations = 100;
  double gradient_tolerance = 1e-5;
  double init_jitter = 0.0;

  // [mercer]
  int mercer_modes = 5;

  // [unify]
  double unify_c = 1.0;
  double unify_lambda = 1.0;
  double unify_a = -30.0;
  double unify_lo = -5.0;
  double unify_hi = 5.0;
  int unify_n = 20;
  int quad_panels = 40;
  int quad_order = 8;

  // [output]
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Kernel strings: "family" or "family(key=value,...)".
[[nodiscard]] KernelSpec parse_kernel(const std::string& text);
[[nodiscard]] std::string kernel_string(const KernelSpec& spec);

[[nodiscard]] ExperimentConfig parse_config(std::istream& in);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);
[[nodiscard]] std::string to_ini(const ExperimentConfig& cfg);

/// Checks names, counts and value ranges without running any numerics
/// beyond building the system and its linearization. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

[[nodiscard]] const std::vector<std::string>& preset_names();
/// Throws ConfigError for unknown names.
[[nodiscard]] ExperimentConfig preset(const std::string& name);

/// Shortest representation that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

}  // namespace koopkern::cli
