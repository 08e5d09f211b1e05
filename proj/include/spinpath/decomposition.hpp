#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "spinpath/disorder.hpp"
#include "spinpath/enumerate.hpp"
#include "spinpath/errors.hpp"
#include "spinpath/gibbs.hpp"
#include "spinpath/path.hpp"
#include "spinpath/quadrature.hpp"
#include "spinpath/sk_constants.hpp"

namespace spinpath {

/// d rho_t(sigma_i) / d X_i(t): the closed form beta sqrt(q)(1 - rho_t(s_i^1 s_i^2))
/// against a central finite difference in X_i(t_k).
struct DerivativeCheck {
  double analytic = 0.0;
  double finite_difference = 0.0;
};

inline DerivativeCheck rho_derivative_check(const SkParams& p, double q, const SkPath& path, int k, int i,
                                            double step = 1e-5) {
  require(p.n <= kPathCap, "path experiments are limited to n <= 10", "n");
  require(0 <= k && k < path.grid().points(), "grid index out of range", "t");
  require(0 <= i && i < p.n, "site index out of range", "i");
  IsingModel model = interpolated_model(p, q, path, k);
  const double m = gibbs_tables(IsingWalker(model), kPathCap).spin(i);
  const double a = p.beta * std::sqrt(q);

  auto shifted_mean = [&](double dx) {
    model.fields()[static_cast<std::size_t>(i)] = a * (path.x(i, k) + dx) + p.h;
    return gibbs_tables(IsingWalker(model), kPathCap).spin(i);
  };
  const double up = shifted_mean(step);
  const double down = shifted_mean(-step);
  return {a * (1.0 - m * m), (up - down) / (2.0 * step)};
}

/// Terms of the fluctuation decomposition at one grid time.
struct DecompositionRecord {
  double t = 0.0;
  double u = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
  double y = 0.0;
  double residual = 0.0;  // y - (u + m1 + m2 - (v1 - v2) - v3)
};

/// Y_N(t) = N^{-1/2}(log Z_N(t) - N log 2 - N beta^2 t (1-q)^2 / 4 - N E[Phi(Y)]) and its
/// martingale and drift terms along one path, with Phi(x) = log cosh(beta sqrt(q) x + h).
/// Gibbs averages are exact at each grid point; every time integral is a
/// left-point sum, so the record at t_k only uses averages at t_0..t_{k-1}.
inline std::vector<DecompositionRecord> decompose_y(const SkParams& p, double q, const SkPath& path,
                                                   const QuadraturePolicy& quad = {}) {
  p.validate();
  require(p.n <= kPathCap, "path experiments are limited to n <= 10", "n");
  require(path.n() == p.n, "path size does not match params.n", "n");
  const int n = p.n;
  const double rn = std::sqrt(static_cast<double>(n));
  const double beta = p.beta;
  const double a = beta * std::sqrt(q);
  const double e_phi = expected_log_cosh(beta, p.h, q, quad);
  const TimeGrid& grid = path.grid();
  const double dt = grid.dt();

  double sum_phi = 0.0;
  for (double eta : path.eta()) sum_phi += detail::log_cosh(a * eta + p.h);
  const double u = (sum_phi - n * e_phi) / rn;

  std::vector<DecompositionRecord> out(static_cast<std::size_t>(grid.points()));
  double m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0, v3 = 0.0;
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.t(k);
    const GibbsTables tab = gibbs_tables(IsingWalker(interpolated_model(p, q, path, k)), kPathCap);
    const double y =
        (tab.log_z - n * std::numbers::ln2 - 0.25 * n * beta * beta * t * (1.0 - q) * (1.0 - q) - n * e_phi) / rn;
    DecompositionRecord& r = out[static_cast<std::size_t>(k)];
    r = {t, u, m1, m2, v1, v2, v3, y, y - (u + m1 + m2 - (v1 - v2) - v3)};
    if (k + 1 == grid.points()) break;

    double dm1 = 0.0;
    std::size_t pr = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++pr) dm1 += tab.pair(i, j) * (path.b(pr, k + 1) - path.b(pr, k));
    double dm2 = 0.0, dv1 = 0.0, dv2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double mi = tab.spin(i);
      dm2 += mi * path.noise_increment(i, k);
      dv1 += mi * path.x(i, k) / (1.0 - t);
      dv2 += 1.0 - mi * mi;
    }
    m1 += beta / n * dm1;
    m2 += a / rn * dm2;
    v1 += a / rn * dv1 * dt;
    v2 += beta * beta * q / rn * dv2 * dt;
    v3 += 0.25 * beta * beta * rn * overlap_moments(tab, q).centered * dt;
  }
  return out;
}

}  // namespace spinpath
