#include "koopkern/dynamics.hpp"

#include "koopkern/errors.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace koopkern {

SystemDef::SystemDef(std::string name, int dim, Field field,
                     std::optional<Vec> equilibrium, Params params,
                     std::optional<Jacobian> jacobian,
                     std::vector<ReferenceEigenpair> references)
    : name_(std::move(name)),
      dim_(dim),
      field_(std::move(field)),
      equilibrium_(std::move(equilibrium)),
      params_(std::move(params)),
      jacobian_(std::move(jacobian)),
      references_(std::move(references)) {
  if (dim_ < 1) throw ContractViolation("SystemDef: dim must be positive");
  if (!field_) throw ContractViolation("SystemDef: missing vector field");
  if (equilibrium_) {
    if (equilibrium_->size() != dim_)
      throw ContractViolation("SystemDef: equilibrium has wrong dimension");
    const Vec f0 = field_(*equilibrium_);
    if (f0.size() != dim_ || f0.cwiseAbs().maxCoeff() > 1e-12)
      throw ContractViolation(fmt::format(
          "SystemDef '{}': field does not vanish at the equilibrium", name_));
  }
}

Mat SystemDef::analytic_jacobian(const Vec& x) const {
  if (!jacobian_)
    throw ContractViolation("system '" + name_ + "' has no analytic Jacobian");
  return (*jacobian_)(x);
}

const ReferenceEigenpair* SystemDef::reference_for(double lambda,
                                                   double tol) const noexcept {
  for (const auto& r : references_)
    if (std::abs(r.lambda - lambda) <= tol) return &r;
  return nullptr;
}

std::size_t LinearizationInfo::index_of(double lambda, double tol) const {
  for (std::size_t i = 0; i < eigenvalues.size(); ++i)
    if (std::abs(eigenvalues[i] - lambda) <= tol) return i;
  throw UnknownEigenvalue(
      fmt::format("eigenvalue {} is not in the linearization spectrum", lambda));
}

const char* to_string(Direction d) noexcept {
  return d == Direction::forward ? "forward" : "backward";
}

IntegratorConfig IntegratorConfig::from_horizon(double horizon, int substeps,
                                                double escape_radius) {
  IntegratorConfig cfg;
  cfg.horizon = horizon;
  cfg.substeps = substeps;
  cfg.dt = substeps > 0 ? horizon / substeps : 0.0;
  cfg.escape_radius = escape_radius;
  cfg.validate();
  return cfg;
}

IntegratorConfig IntegratorConfig::from_step(double dt, double horizon,
                                             double escape_radius) {
  if (!(dt > 0.0) || !(horizon > 0.0))
    throw ContractViolation("IntegratorConfig: dt and horizon must be > 0");
  const int steps =
      std::max(1, static_cast<int>(std::ceil(horizon / dt - 1e-9)));
  return from_horizon(horizon, steps, escape_radius);
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || substeps < 1)
    throw ContractViolation("IntegratorConfig: need dt > 0, T > 0, M >= 1");
  if (std::abs(dt * substeps - horizon) > 1e-12 * std::max(1.0, horizon))
    throw ContractViolation("IntegratorConfig: M * dt must equal T");
  if (!(escape_radius > 0.0))
    throw ContractViolation("IntegratorConfig: escape radius must be > 0");
}

Vec eval_field(const SystemDef& sys, const Vec& x) {
  if (x.size() != sys.dim())
    throw ContractViolation(fmt::format(
        "eval_field: state has dimension {}, system '{}' expects {}", x.size(),
        sys.name(), sys.dim()));
  return sys.field(x);
}

Mat finite_difference_jacobian(const SystemDef& sys, const Vec& x, double h) {
  const auto n = static_cast<Eigen::Index>(sys.dim());
  Mat J(n, n);
  Vec xp = x;
  Vec xm = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (sys.field(xp) - sys.field(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

LinearizationInfo linearize(const SystemDef& sys) {
  if (!sys.equilibrium())
    throw ContractViolation("linearize: system '" + sys.name() +
                            "' has no equilibrium");
  const Vec& xs = *sys.equilibrium();

  LinearizationInfo lin;
  lin.equilibrium = xs;
  lin.analytic = sys.has_analytic_jacobian();
  lin.jacobian = lin.analytic ? sys.analytic_jacobian(xs)
                              : finite_difference_jacobian(sys, xs, 1e-6);
  const Mat& E = lin.jacobian;
  const double norm_inf = E.cwiseAbs().rowwise().sum().maxCoeff();
  const double scale = std::max(1.0, norm_inf);

  // Left eigenvectors of E are right eigenvectors of E^T.
  Eigen::EigenSolver<Mat> es(E.transpose(), true);
  if (es.info() != Eigen::Success)
    throw UnsupportedSpectrum("linearize: eigensolver failed");

  const auto n = E.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& values = es.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(values[i].imag()) > 1e-12 * scale)
      throw UnsupportedSpectrum(fmt::format(
          "linearize: complex eigenvalue {}{:+}i", values[i].real(),
          values[i].imag()));
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values[a].real() > values[b].real();
  });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (std::abs(values[order[k - 1]].real() - values[order[k]].real()) <=
        1e-9 * scale)
      throw UnsupportedSpectrum(fmt::format(
          "linearize: repeated eigenvalue {}", values[order[k]].real()));

  for (auto idx : order) {
    const double lambda = values[idx].real();
    Vec w = es.eigenvectors().col(idx).real();
    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    w /= w[imax];
    const double residual =
        (w.transpose() * E - lambda * w.transpose()).cwiseAbs().maxCoeff();
    if (residual > 1e-10 * scale)
      throw UnsupportedSpectrum(fmt::format(
          "linearize: left eigenvector residual {:.3e} too large", residual));
    lin.eigenvalues.push_back(lambda);
    lin.left_eigenvectors.push_back(std::move(w));
  }
  return lin;
}

Vec nonlinear_part(const SystemDef& sys, const LinearizationInfo& lin,
                   const Vec& x) {
  if (lin.jacobian.rows() != sys.dim())
    throw ContractViolation("nonlinear_part: linearization does not match system");
  return eval_field(sys, x) - lin.jacobian * (x - lin.equilibrium);
}

Vec rk4_step(const SystemDef& sys, const Vec& x, double h) {
  const Vec k1 = sys.field(x);
  const Vec k2 = sys.field(x + 0.5 * h * k1);
  const Vec k3 = sys.field(x + 0.5 * h * k2);
  const Vec k4 = sys.field(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

bool escaped(const Vec& x, double radius) {
  const double n = x.norm();
  return !(n <= radius);  // NaN counts as escaped
}

}  // namespace

Vec advance(const SystemDef& sys, Vec x, double h, int steps,
            double escape_radius) {
  if (x.size() != sys.dim())
    throw ContractViolation("advance: state dimension mismatch");
  for (int k = 0; k < steps; ++k) {
    x = rk4_step(sys, x, h);
    if (escaped(x, escape_radius))
      throw BlowUp(fmt::format("trajectory of '{}' left radius {:g} at t={:.6g}",
                               sys.name(), escape_radius, (k + 1) * h),
                   (k + 1) * h);
  }
  return x;
}

Trajectory flow(const SystemDef& sys, const Vec& x0, const IntegratorConfig& cfg,
                Direction direction) {
  cfg.validate();
  if (x0.size() != sys.dim())
    throw ContractViolation("flow: initial condition has wrong dimension");

  const double h = direction == Direction::forward ? cfg.dt : -cfg.dt;
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(cfg.substeps) + 1);
  traj.states.reserve(static_cast<std::size_t>(cfg.substeps) + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  Vec x = x0;
  for (int k = 1; k <= cfg.substeps; ++k) {
    x = rk4_step(sys, x, h);
    const double t = k * h;
    if (escaped(x, cfg.escape_radius))
      throw BlowUp(fmt::format("trajectory of '{}' left radius {:g} at t={:.6g}",
                               sys.name(), cfg.escape_radius, t),
                   t);
    traj.times.push_back(t);
    traj.states.push_back(x);
  }
  return traj;
}

double characteristic_identity_residual(const SystemDef& sys,
                                        const ScalarFn& phi, double lambda,
                                        const Vec& x0, double t,
                                        const IntegratorConfig& cfg) {
  cfg.validate();
  if (std::abs(t) > cfg.horizon * (1.0 + 1e-12))
    throw ContractViolation("characteristic_identity_residual: t beyond horizon");
  const double phi0 = phi(x0);
  if (t == 0.0) return 0.0;
  const int steps =
      std::max(1, static_cast<int>(std::lround(std::abs(t) / cfg.dt)));
  const Vec xt = advance(sys, x0, t / steps, steps, cfg.escape_radius);
  return std::abs(phi(xt) - std::exp(lambda * t) * phi0) /
         std::max(1.0, std::abs(phi0));
}

}  // namespace koopkern
