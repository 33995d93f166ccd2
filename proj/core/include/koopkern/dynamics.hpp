#pragma once

// Benchmark dynamical systems, fixed-step flows and linearization data.
//
// Every system is autonomous, x' = f(x). Systems are immutable once built and
// are shared through std::shared_ptr<const SystemDef>.

#include "koopkern/linalg.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace koopkern {

using Params = std::map<std::string, double>;

/// Closed-form Koopman eigenfunction shipped with a system.
struct ReferenceEigenpair {
  double lambda = 0.0;
  ScalarFn phi;
  std::string label;
};

class SystemDef {
 public:
  using Field = std::function<Vec(const Vec&)>;
  using Jacobian = std::function<Mat(const Vec&)>;

  /// Throws ContractViolation when dim < 1 or when f(equilibrium) is not
  /// zero to 1e-12 per component.
  SystemDef(std::string name, int dim, Field field,
            std::optional<Vec> equilibrium, Params params = {},
            std::optional<Jacobian> jacobian = std::nullopt,
            std::vector<ReferenceEigenpair> references = {});

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const Params& params() const noexcept { return params_; }
  [[nodiscard]] const std::optional<Vec>& equilibrium() const noexcept {
    return equilibrium_;
  }
  [[nodiscard]] bool has_analytic_jacobian() const noexcept {
    return jacobian_.has_value();
  }
  [[nodiscard]] const std::vector<ReferenceEigenpair>& reference_eigenpairs()
      const noexcept {
    return references_;
  }

  /// Unchecked field evaluation; see eval_field for the checked version.
  [[nodiscard]] Vec field(const Vec& x) const { return field_(x); }

  /// Analytic Jacobian; only valid when has_analytic_jacobian().
  [[nodiscard]] Mat analytic_jacobian(const Vec& x) const;

  /// Reference eigenpair whose eigenvalue is within tol of lambda.
  [[nodiscard]] const ReferenceEigenpair* reference_for(
      double lambda, double tol = 1e-9) const noexcept;

 private:
  std::string name_;
  int dim_;
  Field field_;
  std::optional<Vec> equilibrium_;
  Params params_;
  std::optional<Jacobian> jacobian_;
  std::vector<ReferenceEigenpair> references_;
};

using SystemPtr = std::shared_ptr<const SystemDef>;

/// Linearization at the equilibrium: E = Df(x*), its (real, simple)
/// eigenvalues in descending order and the matching left eigenvectors,
/// each scaled so that its largest-magnitude component is +1.
struct LinearizationInfo {
  Mat jacobian;
  std::vector<double> eigenvalues;
  std::vector<Vec> left_eigenvectors;
  Vec equilibrium;
  bool analytic = false;

  /// Index of the eigenvalue within tol of lambda; throws UnknownEigenvalue.
  [[nodiscard]] std::size_t index_of(double lambda, double tol = 1e-9) const;
  [[nodiscard]] const Vec& left_eigenvector_for(double lambda,
                                                double tol = 1e-9) const {
    return left_eigenvectors[index_of(lambda, tol)];
  }
};

enum class Direction { forward, backward };

[[nodiscard]] const char* to_string(Direction d) noexcept;

struct IntegratorConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  int substeps = 1000;
  double escape_radius = 1e6;

  /// M steps over [0, T].
  static IntegratorConfig from_horizon(double horizon, int substeps,
                                       double escape_radius = 1e6);
  /// Steps of (at most) dt over [0, T]; M = ceil(T / dt) and dt is adjusted
  /// so that M * dt = T exactly.
  static IntegratorConfig from_step(double dt, double horizon,
                                    double escape_radius = 1e6);

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;  ///< 0, +-dt, ..., +-T (signed)
  Points states;
};

/// Checked field evaluation.
[[nodiscard]] Vec eval_field(const SystemDef& sys, const Vec& x);

/// Central finite-difference Jacobian of f at x.
[[nodiscard]] Mat finite_difference_jacobian(const SystemDef& sys,
                                             const Vec& x, double h = 1e-6);

/// Throws ContractViolation without an equilibrium and UnsupportedSpectrum
/// for complex or repeated eigenvalues.
[[nodiscard]] LinearizationInfo linearize(const SystemDef& sys);

/// F(x) - E (x - x*).
[[nodiscard]] Vec nonlinear_part(const SystemDef& sys,
                                 const LinearizationInfo& lin, const Vec& x);

/// One classical RK4 step of signed size h.
[[nodiscard]] Vec rk4_step(const SystemDef& sys, const Vec& x, double h);

/// Integrates M steps of signed size h starting from x and returns the final
/// state. Throws BlowUp when the state leaves escape_radius.
[[nodiscard]] Vec advance(const SystemDef& sys, Vec x, double h, int steps,
                          double escape_radius = 1e6);

/// Fixed-step RK4 trajectory. The backward direction integrates x' = f(x)
/// with negative steps.
[[nodiscard]] Trajectory flow(const SystemDef& sys, const Vec& x0,
                              const IntegratorConfig& cfg,
                              Direction direction = Direction::forward);

/// |phi(s_t(x0)) - e^{lambda t} phi(x0)| / max(1, |phi(x0)|), with s_t
/// computed by RK4 at the step size of cfg (t may be negative).
[[nodiscard]] double characteristic_identity_residual(
    const SystemDef& sys, const ScalarFn& phi, double lambda, const Vec& x0,
    double t, const IntegratorConfig& cfg);

// -- built-in systems -------------------------------------------------------

/// x' = x - x^3; eigenfunction x / sqrt(1 - x^2) at lambda = 1.
[[nodiscard]] SystemPtr make_cubic1d();
/// Polynomial 2D system with eigenvalues lambda1 (stable) and lambda2.
[[nodiscard]] SystemPtr make_poly2d(double lambda1 = -1.0, double lambda2 = 3.0);
/// x1' = x2, x2' = -delta x2 - x1 (beta + alpha x1^2).
[[nodiscard]] SystemPtr make_duffing(double delta = 0.5, double beta = -1.0,
                                     double alpha = 1.0);
/// x' = c. No equilibrium.
[[nodiscard]] SystemPtr make_advection1d(double c = 1.0);
/// x' = diag(a, b) x.
[[nodiscard]] SystemPtr make_linear_test(double a = -1.0, double b = 2.0);

/// User-defined system; the Jacobian falls back to finite differences.
[[nodiscard]] SystemPtr make_custom_system(std::string name, int dim,
                                           SystemDef::Field field,
                                           std::optional<Vec> equilibrium);

/// Names accepted by make_system, in display form.
[[nodiscard]] std::vector<std::string> builtin_system_names();

/// Builds a system from a name and parameter overrides. Accepts the
/// parenthesized forms "advection1d(2)" and "linear_test(-1,2)" as well as
/// bare names with parameters in `overrides`. Unknown names or parameters
/// throw ContractViolation.
[[nodiscard]] SystemPtr make_system(const std::string& name,
                                    const Params& overrides = {});

}  // namespace koopkern
