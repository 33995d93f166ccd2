#include "koopkern/spectral.hpp"

#include "koopkern/errors.hpp"
#include "koopkern/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace koopkern {

Vec uniform_weights(std::size_t n) {
  if (n == 0) throw ContractViolation("uniform_weights: empty grid");
  return Vec::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

Mat MercerDecomposition::reconstruct(int k) const {
  const auto n = raw_eigenvalues.size();
  const auto m = k < 0 ? n : std::min<Eigen::Index>(k, n);
  return modes.leftCols(m) * raw_eigenvalues.head(m).asDiagonal() * modes.leftCols(m).transpose();
}

double MercerDecomposition::orthonormality_error() const {
  const Mat gram = modes.transpose() * weights.asDiagonal() * modes;
  return (gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

MercerDecomposition mercer_decompose(const Mat& K, Points grid, Vec weights) {
  const auto n = K.rows();
  if (K.cols() != n) throw ContractViolation("mercer: kernel matrix must be square");
  if (n == 0) throw ContractViolation("mercer: empty grid");
  if (n > 10000) throw ContractViolation("mercer: grids are capped at 10^4 points");
  if (weights.size() != n) throw ContractViolation("mercer: one weight per grid point required");
  if (!grid.empty() && static_cast<Eigen::Index>(grid.size()) != n)
    throw ContractViolation("mercer: grid size does not match the kernel matrix");
  if (!(weights.array() > 0.0).all()) throw ContractViolation("mercer: weights must be positive");

  const Vec sw = weights.cwiseSqrt();
  Mat S = sw.asDiagonal() * K * sw.asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  if (es.info() != Eigen::Success) throw IllConditioned("mercer: eigensolver failed", 0.0);

  MercerDecomposition d;
  d.raw_eigenvalues = es.eigenvalues().reverse();
  d.modes = sw.cwiseInverse().asDiagonal() * es.eigenvectors().rowwise().reverse();
  d.grid = std::move(grid);
  d.weights = std::move(weights);
  d.eigenvalues = d.raw_eigenvalues;

  const double mu1 = std::max(d.raw_eigenvalues[0], 0.0);
  const double lowest = d.raw_eigenvalues[n - 1];
  for (Eigen::Index i = 0; i < n; ++i) {
    double& mu = d.eigenvalues[i];
    if (mu < 0.0 && mu >= -1e-8 * mu1) mu = 0.0;
  }
  if (lowest < -1e-8 * mu1)
    d.warnings.push_back(
        fmt::format("negative eigenvalue {} below the clipping threshold -1e-8*mu_1", lowest));
  if (lowest < -1e-4 * mu1) {
    d.indefinite = true;
    d.warnings.push_back("kernel is indefinite on this grid");
  }
  return d;
}

MercerDecomposition mercer_decompose(const KernelSpec& kernel, Points grid, Vec weights) {
  Mat K = gram(kernel, grid).values;
  return mercer_decompose(K, std::move(grid), std::move(weights));
}

MercerDecomposition mercer_decompose(const KernelMixture& kernel, Points grid, Vec weights) {
  Mat K = mixture_gram(kernel, grid);
  return mercer_decompose(K, std::move(grid), std::move(weights));
}

ModeCheckReport koopman_mode_check(const std::vector<Vec>& eigenfunctions, const Points& grid,
                                   const Vec& weights) {
  const auto n = weights.size();
  if (n == 0 || static_cast<Eigen::Index>(grid.size()) != n)
    throw ContractViolation("mode check: grid and weights must match and be nonempty");
  const auto m = static_cast<Eigen::Index>(eigenfunctions.size());
  if (m > n) throw ContractViolation("mode check: more functions than grid points");

  ModeCheckReport rep;
  rep.rank = static_cast<int>(m);
  if (m == 0) {
    const auto d = mercer_decompose(Mat::Zero(n, n), grid, weights);
    rep.eigenvalues = d.eigenvalues;
    rep.max_deviation = d.eigenvalues.cwiseAbs().maxCoeff();
    return rep;
  }

  const Vec sw = weights.cwiseSqrt();
  Mat Phi(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (eigenfunctions[static_cast<std::size_t>(j)].size() != n)
      throw ContractViolation("mode check: function sampled on a different grid");
    Phi.col(j) = sw.cwiseProduct(eigenfunctions[static_cast<std::size_t>(j)]);
  }
  Eigen::ColPivHouseholderQR<Mat> qr(Phi);
  qr.setThreshold(1e-10);
  if (qr.rank() < m)
    throw Degenerate(fmt::format("mode check: functions have rank {} < {} on the grid", qr.rank(), m));
  const Mat Q = qr.householderQ() * Mat::Identity(n, m);

  // Weighted-orthonormal functions are W^{-1/2} Q; K = their outer product.
  const Mat Fw = sw.cwiseInverse().asDiagonal() * Q;
  const Mat K = Fw * Fw.transpose();
  const auto d = mercer_decompose(K, grid, weights);
  rep.eigenvalues = d.eigenvalues;
  for (Eigen::Index i = 0; i < n; ++i)
    rep.max_deviation =
        std::max(rep.max_deviation, std::abs(d.raw_eigenvalues[i] - (i < m ? 1.0 : 0.0)));

  const Mat U = sw.asDiagonal() * d.modes.leftCols(m);
  const Mat resid = U - Q * (Q.transpose() * U);
  Eigen::JacobiSVD<Mat> svd(resid);
  rep.subspace_angle = std::asin(std::min(1.0, svd.singularValues()[0]));
  return rep;
}

EigenrelationReport trajectory_eigenrelation_check(const SystemDef& system, const ScalarFn& phi,
                                                   double lambda, const Points& probes,
                                                   double horizon, int steps,
                                                   double escape_radius) {
  if (!(lambda > 0.0)) throw ContractViolation("eigenrelation: lambda must be > 0");
  if (!(horizon > 0.0) || steps < 1) throw ContractViolation("eigenrelation: need T > 0, M >= 1");

  EigenrelationReport rep;
  rep.tail = std::exp(-2.0 * lambda * horizon);
  const double dt = horizon / steps;
  std::vector<double> dev(probes.size(), -1.0);
  try {
    parallel_for(probes.size(), [&](std::size_t p) {
      const Vec& x0 = probes[p];
      const double phi0 = phi(x0);
      if (std::abs(phi0) < 1e-8) return;
      double integral = 0.0;
      Vec x = x0;
      for (int k = 0; k < steps; ++k) {
        const Vec mid = advance(system, x, -0.5 * dt, 1, escape_radius);
        integral += std::exp(-lambda * (k + 0.5) * dt) * phi(mid) * dt;
        x = advance(system, mid, -0.5 * dt, 1, escape_radius);
      }
      dev[p] = std::abs(2.0 * lambda * integral / phi0 - 1.0);
    });
  } catch (const BlowUp& e) {
    throw Inconclusive(fmt::format("eigenrelation: backward trajectory blew up ({})", e.what()));
  }
  for (double d : dev) {
    if (d < 0.0) {
      ++rep.probes_excluded;
      continue;
    }
    ++rep.probes_used;
    rep.deviations.push_back(d);
    rep.max_deviation = std::max(rep.max_deviation, d);
  }
  if (rep.probes_used == 0) throw Inconclusive("eigenrelation: every probe has |phi| < 1e-8");
  return rep;
}

}  // namespace koopkern
