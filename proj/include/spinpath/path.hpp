#pragma once

// Reversed-time Brownian motion and the interpolating Hamiltonian
//
//   -H_t(sigma) = (beta/sqrt N) sum_{i<j} B_ij(t) s_i s_j + beta sqrt(q) sum_i X_i(t) s_i + h sum_i s_i
//
// X solves dX = -X/(1-t) dt + dW with X(0) = eta, so X(1) = 0 and the t = 1
// endpoint is the SK Hamiltonian with couplings B(1).

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "spinpath/disorder.hpp"
#include "spinpath/errors.hpp"
#include "spinpath/gibbs.hpp"
#include "spinpath/ibp.hpp"
#include "spinpath/rng.hpp"
#include "spinpath/spin.hpp"

namespace spinpath {

/// Largest N for experiments that enumerate at every grid point.
inline constexpr int kPathCap = 10;

/// Uniform grid t_k = k / steps on [0, 1].
class TimeGrid {
 public:
  explicit TimeGrid(int steps) : steps_(steps) { require(steps >= 2, "grid needs at least 2 steps", "steps"); }

  int steps() const noexcept { return steps_; }
  int points() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return 1.0 / steps_; }
  double t(int k) const noexcept { return static_cast<double>(k) / steps_; }

  /// Index k with t_k = t; t must lie on the grid.
  int index_of(double t) const {
    require(t >= 0.0 && t <= 1.0, "time must lie in [0, 1]", "t");
    const double x = t * steps_;
    const double k = std::round(x);
    require(std::abs(x - k) <= 1e-9, "time is not a grid point", "t");
    return static_cast<int>(k);
  }

 private:
  int steps_;
};

/// One reversed Brownian trajectory on the grid by exact Gaussian transitions:
/// given X(t) = x, X(t') ~ N(x (1-t')/(1-t), (1-t')(t'-t)/(1-t)).
/// X(t_0) = eta and X(1) = 0 exactly.
inline std::vector<double> sample_reversed_bm(const TimeGrid& grid, double eta, NormalStream& normal,
                                              int last = -1) {
  const int end = last < 0 ? grid.steps() : last;
  require(0 <= end && end <= grid.steps(), "trajectory end index out of range");
  std::vector<double> x(static_cast<std::size_t>(end) + 1);
  x[0] = eta;
  for (int k = 0; k < end; ++k) {
    const double t0 = grid.t(k), t1 = grid.t(k + 1);
    if (k + 1 == grid.steps()) {
      x[k + 1] = 0.0;
      continue;
    }
    const double ratio = (1.0 - t1) / (1.0 - t0);
    x[k + 1] = x[k] * ratio + normal(std::sqrt(ratio * (t1 - t0)));
  }
  return x;
}

/// Sampled trajectories for the SK interpolation: B_ij for i<j (standard
/// Brownian motions, pair order as SkDisorder), X_i and their starting
/// points eta_i. Fully determined by (n, grid, seed).
class SkPath {
 public:
  static SkPath sample(int n, const TimeGrid& grid, std::uint64_t seed) {
    require(n >= 1, "n must be >= 1", "n");
    SkPath p(n, grid, seed);
    NormalStream normal(seed);
    const std::size_t pts = static_cast<std::size_t>(grid.points());
    for (int i = 0; i < n; ++i) p.eta_[static_cast<std::size_t>(i)] = normal();
    for (int i = 0; i < n; ++i) {
      const std::vector<double> x = sample_reversed_bm(grid, p.eta_[static_cast<std::size_t>(i)], normal);
      std::copy(x.begin(), x.end(), p.x_.begin() + static_cast<std::ptrdiff_t>(i * pts));
    }
    const double sd = std::sqrt(grid.dt());
    for (std::size_t pr = 0; pr < p.pairs(); ++pr) {
      double b = 0.0;
      for (std::size_t k = 1; k < pts; ++k) {
        b += normal(sd);
        p.b_[pr * pts + k] = b;
      }
    }
    return p;
  }

  int n() const noexcept { return n_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t pairs() const noexcept { return SkDisorder::pair_count(n_); }
  const std::vector<double>& eta() const noexcept { return eta_; }

  double x(int i, int k) const { return x_[static_cast<std::size_t>(i) * grid_.points() + k]; }
  double b(std::size_t pair, int k) const { return b_[pair * grid_.points() + k]; }

  std::vector<double> x_at(int k) const {
    std::vector<double> v(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) v[i] = x(i, k);
    return v;
  }

  std::vector<double> b_at(int k) const {
    std::vector<double> v(pairs());
    for (std::size_t pr = 0; pr < v.size(); ++pr) v[pr] = b(pr, k);
    return v;
  }

  /// The coupling table g = B(t_k).
  SkDisorder couplings_at(int k) const { return SkDisorder(n_, b_at(k)); }

  /// Increment of the driving noise W_i over [t_k, t_{k+1}], recovered from
  /// X(t_{k+1}) = X(t_k) - X(t_k) dt / (1 - t_k) + dW.
  double noise_increment(int i, int k) const {
    const double t0 = grid_.t(k);
    return x(i, k + 1) - x(i, k) * (1.0 - grid_.dt() / (1.0 - t0));
  }

  /// The same trajectories observed on every `factor`-th grid point.
  SkPath coarsen(int factor) const {
    require(factor >= 1 && grid_.steps() % factor == 0, "coarsening factor must divide the step count", "steps");
    const TimeGrid g(grid_.steps() / factor);
    SkPath p(n_, g, seed_);
    p.eta_ = eta_;
    const std::size_t fine = static_cast<std::size_t>(grid_.points()), coarse = static_cast<std::size_t>(g.points());
    for (int i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < coarse; ++k) p.x_[i * coarse + k] = x_[i * fine + k * factor];
    for (std::size_t pr = 0; pr < pairs(); ++pr)
      for (std::size_t k = 0; k < coarse; ++k) p.b_[pr * coarse + k] = b_[pr * fine + k * factor];
    return p;
  }

 private:
  SkPath(int n, const TimeGrid& grid, std::uint64_t seed)
      : n_(n),
        grid_(grid),
        seed_(seed),
        eta_(static_cast<std::size_t>(n), 0.0),
        x_(static_cast<std::size_t>(n) * grid.points(), 0.0),
        b_(SkDisorder::pair_count(n) * grid.points(), 0.0) {}

  int n_;
  TimeGrid grid_;
  std::uint64_t seed_;
  std::vector<double> eta_, x_, b_;
};

/// The Ising model of -H_{t_k}: couplings beta B(t_k)/sqrt N, fields beta sqrt(q) X(t_k) + h.
inline IsingModel interpolated_model(const SkParams& p, double q, const SkPath& path, int k) {
  p.validate();
  require(path.n() == p.n, "path size does not match params.n", "n");
  require(q >= 0.0 && q <= 1.0, "q must lie in [0, 1]", "q");
  std::vector<double> f(static_cast<std::size_t>(p.n));
  const double a = p.beta * std::sqrt(q);
  for (int i = 0; i < p.n; ++i) f[i] = a * path.x(i, k) + p.h;
  return IsingModel::from_pairs(p.n, path.b_at(k), p.beta / std::sqrt(static_cast<double>(p.n)), std::move(f));
}

/// -H_{t_k}(sigma) at every grid time.
inline std::vector<double> hamiltonian_path(const SpinConfig& sigma, const SkParams& p, double q,
                                            const SkPath& path) {
  p.validate();
  require(sigma.size() == p.n && path.n() == p.n, "hamiltonian_path: dimension mismatch", "n");
  const int n = p.n;
  const double pair_scale = p.beta / std::sqrt(static_cast<double>(n));
  const double x_scale = p.beta * std::sqrt(q);
  double field = 0.0;
  for (int i = 0; i < n; ++i) field += sigma[i];
  std::vector<double> out(static_cast<std::size_t>(path.grid().points()));
  for (int k = 0; k < path.grid().points(); ++k) {
    double pair = 0.0, xs = 0.0;
    std::size_t pr = 0;
    for (int i = 0; i < n; ++i) {
      xs += path.x(i, k) * sigma[i];
      for (int j = i + 1; j < n; ++j, ++pr) pair += path.b(pr, k) * sigma[i] * sigma[j];
    }
    out[static_cast<std::size_t>(k)] = pair_scale * pair + x_scale * xs + p.h * field;
  }
  return out;
}

/// Sum of squared increments of `values` over the first `upto` steps
/// (all of them by default).
inline double realized_qv(std::span<const double> values, int upto = -1) {
  require(values.size() >= 2, "realized_qv needs at least two values");
  const std::size_t end = upto < 0 ? values.size() - 1 : static_cast<std::size_t>(upto);
  require(end < values.size(), "realized_qv: upto exceeds the path length");
  double acc = 0.0;
  for (std::size_t k = 0; k < end; ++k) {
    const double d = values[k + 1] - values[k];
    acc += d * d;
  }
  return acc;
}

/// Limit of the realized quadratic variation of -H_t over [0, t]:
/// (N beta^2 / 2)((N-1)/N + 2q) t.
inline double expected_qv(const SkParams& p, double q, double t) {
  const double n = p.n;
  return 0.5 * n * p.beta * p.beta * ((n - 1.0) / n + 2.0 * q) * t;
}

/// Monte Carlo estimate of E[phi(X(t))] - E[phi(eta)] + (1/2) int_0^t E[lap phi(X(s))] ds
/// for a k-vector of independent reversed Brownian motions. The time integral
/// uses the trapezoid rule on a grid of `steps` steps. Path j draws from
/// derive_seed(seed, j).
template <class Phi, class Laplacian>
Estimate backward_heat_residual(Phi&& phi, Laplacian&& lap, int k, double t, long n_paths, int steps, std::uint64_t seed) {
  require(k >= 1, "dimension must be >= 1", "k");
  require(n_paths >= 2, "need at least 2 paths", "paths");
  const TimeGrid grid(steps);
  const int end = grid.index_of(t);
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(k));
  std::vector<double> point(static_cast<std::size_t>(k));
  double mean = 0.0, m2 = 0.0;
  for (long j = 0; j < n_paths; ++j) {
    NormalStream normal(derive_seed(seed, static_cast<std::uint64_t>(j), streams::path));
    for (int d = 0; d < k; ++d) {
      const double eta = normal();
      xs[d] = sample_reversed_bm(grid, eta, normal, end);
    }
    auto at = [&](int idx) -> std::span<const double> {
      for (int d = 0; d < k; ++d) point[d] = xs[d][static_cast<std::size_t>(idx)];
      return point;
    };
    const double start = phi(at(0));
    const double finish = phi(at(end));
    double integral = 0.0;
    double left = lap(at(0));
    for (int idx = 0; idx < end; ++idx) {
      const double right = lap(at(idx + 1));
      integral += 0.5 * (left + right) * grid.dt();
      left = right;
    }
    const double v = finish - start + 0.5 * integral;
    const double delta = v - mean;
    mean += delta / static_cast<double>(j + 1);
    m2 += delta * (v - mean);
  }
  return {mean, std::sqrt(m2 / static_cast<double>(n_paths - 1) / static_cast<double>(n_paths))};
}

}  // namespace spinpath
