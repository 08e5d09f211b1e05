#pragma once

#include <cmath>
#include <vector>

#include "spinpath/disorder.hpp"
#include "spinpath/gibbs.hpp"
#include "spinpath/path.hpp"
#include "spinpath/perceptron_constants.hpp"
#include "spinpath/potential.hpp"
#include "spinpath/rng.hpp"
#include "spinpath/spin.hpp"

namespace spinpath {

/// The m-th pattern field moved along
///   S^l(t) = N^{-1/2} sum_i B_i(t) s_i^l + sqrt(q_m) X(t) + sqrt(1 - q_m) Xhat^l(t)
/// with independent Brownian motions B_i, and reversed Brownian motions X and
/// Xhat^l started at eta and eta_hat^l.
struct PerceptronPathSample {
  TimeGrid grid{2};
  double q = 0.0;
  std::vector<std::vector<double>> fields;  // [replica][k]: S^l(t_k)
  std::vector<double> gibbs_factor;         // [k]: rho_{m-1}(exp(u(S^1(t_k))))
  std::vector<double> b_end;                // B_i(1), the pattern column the path ends at
  double eta = 0.0;
  std::vector<double> eta_hat;  // [replica]
};

/// Samples one path. `sigmas` are the replicas whose fields are tracked; the
/// Gibbs factor averages over the measure with the first m-1 patterns of `dis`
/// and uses replica 1's Xhat. q_m solves the fixed point at alpha = m / N
/// unless `q_override` is in [0, 1].
inline PerceptronPathSample perceptron_path_sample(const std::vector<SpinConfig>& sigmas, const PerceptronDisorder& dis,
                                                   const BoundedU& u, int m, const TimeGrid& grid,
                                                   NormalStream& normal, double q_override = -1.0) {
  const int n = dis.n();
  require(n <= kPathCap, "path experiments are limited to n <= 10", "n");
  require(m >= 1 && m - 1 <= dis.m(), "pattern index out of range", "m");
  require(!sigmas.empty(), "at least one replica is required");
  for (const SpinConfig& s : sigmas) require(s.size() == n, "replica length does not match the disorder", "n");

  PerceptronPathSample out;
  out.grid = grid;
  out.q = (q_override >= 0.0 && q_override <= 1.0)
              ? q_override
              : solve_perceptron_fp(static_cast<double>(m) / n, u).q;
  const std::size_t pts = static_cast<std::size_t>(grid.points());
  const std::size_t reps = sigmas.size();

  out.eta = normal();
  const std::vector<double> x = sample_reversed_bm(grid, out.eta, normal);
  std::vector<std::vector<double>> xhat(reps);
  out.eta_hat.resize(reps);
  for (std::size_t l = 0; l < reps; ++l) {
    out.eta_hat[l] = normal();
    xhat[l] = sample_reversed_bm(grid, out.eta_hat[l], normal);
  }
  std::vector<double> b(static_cast<std::size_t>(n) * pts, 0.0);
  const double sd = std::sqrt(grid.dt());
  for (int i = 0; i < n; ++i)
    for (std::size_t k = 1; k < pts; ++k) b[i * pts + k] = b[i * pts + k - 1] + normal(sd);

  const double rn = std::sqrt(static_cast<double>(n));
  const double sq = std::sqrt(out.q), sqc = std::sqrt(1.0 - out.q);
  out.fields.assign(reps, std::vector<double>(pts));
  out.gibbs_factor.resize(pts);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < pts; ++k) {
    for (int i = 0; i < n; ++i) column[i] = b[i * pts + k];
    for (std::size_t l = 0; l < reps; ++l) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += column[i] * sigmas[l][i];
      out.fields[l][k] = s / rn + sq * x[k] + sqc * xhat[l][k];
    }
    const double offset = sq * x[k] + sqc * xhat[0][k];
    out.gibbs_factor[k] = gibbs_average(PerceptronWalker(dis, u, m - 1, column, offset), kPathCap).mean;
  }
  out.b_end = column;
  return out;
}

}  // namespace spinpath
