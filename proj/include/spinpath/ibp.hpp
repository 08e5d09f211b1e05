#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spinpath/errors.hpp"
#include "spinpath/quadrature.hpp"
#include "spinpath/rng.hpp"

namespace spinpath {

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

namespace detail {

/// A with A A^T = cov, from the symmetric eigendecomposition. Rejects
/// non-symmetric or indefinite input.
inline Eigen::MatrixXd psd_root(const Eigen::MatrixXd& cov) {
  require(cov.rows() == cov.cols() && cov.rows() >= 1, "covariance must be a non-empty square matrix", "cov");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  require(cov.allFinite(), "covariance has non-finite entries", "cov");
  require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "covariance is not symmetric", "cov");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  require(eig.eigenvalues().minCoeff() >= -1e-12 * scale, "covariance is not positive semidefinite", "cov");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

template <class Psi, class Grad>
double ibp_integrand(Psi& psi, Grad& grad, const Eigen::MatrixXd& cov, const Eigen::VectorXd& y, int i) {
  const Eigen::VectorXd g = grad(y);
  return psi(y) * y[i] - cov.row(i).dot(g);
}

}  // namespace detail

/// E[psi(Y) Y_i] - sum_j E[Y_i Y_j] E[d_j psi(Y)] for Y ~ N(0, cov), by a
/// tensor Gauss-Hermite rule with `nodes` points per axis. Limited to k <= 3.
/// `psi(y)` returns a scalar and `grad(y)` the gradient as an Eigen vector.
template <class Psi, class Grad>
double ibp_residual(Psi&& psi, Grad&& grad, const Eigen::MatrixXd& cov, int i, int nodes = 24) {
  const Eigen::MatrixXd a = detail::psd_root(cov);
  const int k = static_cast<int>(cov.rows());
  require(0 <= i && i < k, "ibp_residual: index out of range", "i");
  require(k <= 3, "ibp_residual: tensor quadrature supports k <= 3; use ibp_residual_mc", "k");
  const QuadratureRule& rule = standard_rule(nodes);
  const auto& x = rule.nodes();
  const auto& w = rule.weights();
  const int n = rule.size();
  int total = 1;
  for (int d = 0; d < k; ++d) total *= n;

  Eigen::VectorXd z(k);
  double acc = 0.0;
  for (int flat = 0; flat < total; ++flat) {
    double weight = 1.0;
    for (int d = 0, r = flat; d < k; ++d, r /= n) {
      z[d] = x[static_cast<std::size_t>(r % n)];
      weight *= w[static_cast<std::size_t>(r % n)];
    }
    if (weight == 0.0) continue;
    const Eigen::VectorXd y = a * z;
    acc += weight * detail::ibp_integrand(psi, grad, cov, y, i);
  }
  if (!std::isfinite(acc)) throw NumericalError("ibp_residual: non-finite value");
  return acc;
}

/// Monte Carlo version for any k: the mean of psi(Y) Y_i - (cov grad psi(Y))_i
/// over `samples` draws, with its standard error.
template <class Psi, class Grad>
Estimate ibp_residual_mc(Psi&& psi, Grad&& grad, const Eigen::MatrixXd& cov, int i, long samples,
                         std::uint64_t seed) {
  const Eigen::MatrixXd a = detail::psd_root(cov);
  const int k = static_cast<int>(cov.rows());
  require(0 <= i && i < k, "ibp_residual: index out of range", "i");
  require(samples >= 2, "ibp_residual_mc needs at least 2 samples", "samples");
  NormalStream normal(seed);
  Eigen::VectorXd z(k);
  double mean = 0.0, m2 = 0.0;
  for (long s = 0; s < samples; ++s) {
    for (int d = 0; d < k; ++d) z[d] = normal();
    const double v = detail::ibp_integrand(psi, grad, cov, a * z, i);
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

}  // namespace spinpath
