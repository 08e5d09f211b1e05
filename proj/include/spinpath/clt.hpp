#pragma once

// Disorder-level experiments. Sample s draws its couplings from
// derive_seed(master, s, streams::disorder) and writes only slot s, so the
// per-sample values do not depend on the worker count.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "spinpath/disorder.hpp"
#include "spinpath/enumerate.hpp"
#include "spinpath/errors.hpp"
#include "spinpath/gibbs.hpp"
#include "spinpath/parallel.hpp"
#include "spinpath/perceptron_constants.hpp"
#include "spinpath/potential.hpp"
#include "spinpath/rng.hpp"
#include "spinpath/sk_constants.hpp"
#include "spinpath/stats.hpp"

namespace spinpath {

enum class ModelTag { sk, perceptron };

struct ExperimentConfig {
  ModelTag model = ModelTag::sk;
  int n = 20;
  double beta = 0.05;
  double h = 0.3;
  double alpha = 0.125;
  double u_scale = 0.2;
  int samples = 2000;
  std::uint64_t seed = 42;
  int steps = 1024;
  int threads = 0;

  /// Pattern count M = round(alpha n).
  int patterns() const { return static_cast<int>(std::lround(alpha * n)); }
  BoundedU potential() const { return BoundedU::scaled_tanh(u_scale); }

  void validate() const {
    require(n >= 1 && n <= kEnumerationCap, "n must lie in [1, 24]", "n");
    require(std::isfinite(beta) && beta >= 0.0, "beta must be >= 0", "beta");
    require(std::isfinite(h) && h >= 0.0, "h must be >= 0", "h");
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0", "alpha");
    require(std::isfinite(u_scale), "u-scale must be finite", "u-scale");
    require(samples >= 2, "samples must be >= 2", "samples");
    require(steps >= 2, "steps must be >= 2", "steps");
    require(threads >= 0, "threads must be >= 0", "threads");
  }
};

struct FluctuationRecord {
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  stats::Interval variance_ci;
  double tau2 = 0.0;
  double ks_distance = 0.0;
  double ks_critical = 0.0;
};

/// Aggregates per-sample values. The bootstrap draws from `bootstrap_seed`.
inline FluctuationRecord summarize(std::vector<double> values, std::vector<std::uint64_t> seeds, double tau2,
                                   std::uint64_t bootstrap_seed) {
  FluctuationRecord r;
  r.mean = stats::mean(values);
  r.variance = stats::variance(values);
  r.std_error = stats::std_error(values);
  r.variance_ci = stats::bootstrap_variance_ci(values, bootstrap_seed);
  r.tau2 = tau2;
  r.ks_distance = stats::ks_distance_normal(values);
  r.ks_critical = stats::ks_critical_5pct(values.size());
  r.values = std::move(values);
  r.seeds = std::move(seeds);
  return r;
}

inline std::uint64_t sample_seed(std::uint64_t master, std::size_t s) {
  return derive_seed(master, static_cast<std::uint64_t>(s), streams::disorder);
}

inline std::uint64_t bootstrap_seed(std::uint64_t master) { return derive_seed(master, 0, streams::bootstrap); }

/// Centering of the SK free energy: log 2 + beta^2 (1-q)^2 / 4 + E[log cosh(beta sqrt(q) Y + h)].
struct SkCentering {
  double q = 0.0;
  double centering = 0.0;
  double tau2 = 0.0;
};

inline SkCentering sk_centering(double beta, double h) {
  const SkVariances v = sk_variances(beta, h);
  const double e_phi = expected_log_cosh(beta, h, v.q);
  return {v.q, std::numbers::ln2 + 0.25 * beta * beta * (1.0 - v.q) * (1.0 - v.q) + e_phi, v.tau2};
}

/// Y_N(1) = N^{1/2}(p_N - centering) for one disorder draw. At beta = 0 the
/// partition function is (2 cosh h)^N and p_N is taken in closed form.
inline double sk_fluctuation(const SkDisorder& dis, const SkParams& p, const SkCentering& c) {
  const double rn = std::sqrt(static_cast<double>(p.n));
  const double p_n = p.beta == 0.0 ? std::numbers::ln2 + detail::log_cosh(p.h)
                                   : sk_partition_exact(dis, p).log_z / p.n;
  return rn * (p_n - c.centering);
}

inline FluctuationRecord run_sk_clt(const ExperimentConfig& cfg) {
  cfg.validate();
  const SkParams p{cfg.beta, cfg.h, cfg.n};
  const SkCentering c = sk_centering(cfg.beta, cfg.h);
  const std::size_t count = static_cast<std::size_t>(cfg.samples);
  std::vector<double> values(count);
  std::vector<std::uint64_t> seeds(count);
  parallel_for(count, cfg.threads, [&](std::size_t s) {
    seeds[s] = sample_seed(cfg.seed, s);
    NormalStream normal(seeds[s]);
    values[s] = sk_fluctuation(SkDisorder::sample(cfg.n, normal), p, c);
  });
  return summarize(std::move(values), std::move(seeds), c.tau2, bootstrap_seed(cfg.seed));
}

/// One row of the overlap concentration table.
struct OverlapRow {
  int n = 0;
  double mean_centered = 0.0;  // E[rho((R - q)^2)] over disorder
  double std_error = 0.0;
  double scaled = 0.0;  // n * mean_centered
};

inline std::vector<OverlapRow> run_overlap_concentration(const std::vector<int>& n_list, double beta, double h,
                                                         int n_disorder, std::uint64_t seed, int threads = 0) {
  require(n_disorder >= 2, "samples must be >= 2", "samples");
  const double q = solve_q_sk(beta, h).q;
  std::vector<OverlapRow> rows;
  for (int n : n_list) {
    const SkParams p{beta, h, n};
    p.validate();
    check_enumerable(n, kEnumerationCap);
    std::vector<double> v(static_cast<std::size_t>(n_disorder));
    // Each n gets its own seed stream so that adding sizes leaves others unchanged.
    const std::uint64_t master = derive_seed(seed, static_cast<std::uint64_t>(n), streams::disorder);
    parallel_for(v.size(), threads, [&](std::size_t s) {
      NormalStream normal(sample_seed(master, s));
      v[s] = overlap_moments_exact(SkDisorder::sample(n, normal), p, q).centered;
    });
    const double m = stats::mean(v);
    rows.push_back({n, m, stats::std_error(v), n * m});
  }
  return rows;
}

/// Phi(M) and the limiting variance for the perceptron run.
struct PerceptronCentering {
  int m = 0;
  double phi = 0.0;
  double tau2 = 0.0;
};

inline PerceptronCentering perceptron_centering(int n, int m, const BoundedU& u) {
  const double alpha = static_cast<double>(m) / n;
  return {m, phi_m(n, m, u), u.is_constant() ? 0.0 : tau2_perceptron(alpha, u)};
}

/// N^{1/2}(log Z_{N,M} / N - Phi(M)). For constant u = c, log Z = N log 2 + M c
/// is used in closed form.
inline double perceptron_fluctuation(const PerceptronDisorder& dis, const BoundedU& u, const PerceptronCentering& c) {
  const int n = dis.n();
  const double rn = std::sqrt(static_cast<double>(n));
  const double p_n = u.is_constant() ? std::numbers::ln2 + c.m * u.parameter() / n
                                     : perceptron_partition_exact(dis, u, c.m) / n;
  return rn * (p_n - c.phi);
}

inline FluctuationRecord run_perceptron_clt(const ExperimentConfig& cfg) {
  cfg.validate();
  const int m = cfg.patterns();
  require(m >= 1, "alpha * n must round to at least one pattern", "alpha");
  const BoundedU u = cfg.potential();
  const PerceptronCentering c = perceptron_centering(cfg.n, m, u);
  const std::size_t count = static_cast<std::size_t>(cfg.samples);
  std::vector<double> values(count);
  std::vector<std::uint64_t> seeds(count);
  parallel_for(count, cfg.threads, [&](std::size_t s) {
    seeds[s] = sample_seed(cfg.seed, s);
    NormalStream normal(seeds[s]);
    values[s] = perceptron_fluctuation(PerceptronDisorder::sample(cfg.n, m, normal), u, c);
  });
  return summarize(std::move(values), std::move(seeds), c.tau2, bootstrap_seed(cfg.seed));
}

/// Telescoping of the perceptron free energy over patterns:
/// Y_m = (1/N) log rho_{m-1}(exp(u(S_m))) - (Phi(m) - Phi(m-1)).
struct TelescopingReport {
  std::vector<double> y;         // Y_1..Y_M
  std::vector<double> lhs;       // log Z_{N,m} / N - Phi(m)
  std::vector<double> residual;  // |sum_{k<=m} Y_k - lhs_m|
  double max_residual = 0.0;
};

inline TelescopingReport telescoping_check(const PerceptronDisorder& dis, const BoundedU& u, int m_max) {
  require(m_max >= 1 && m_max <= dis.m(), "pattern count out of range", "m");
  const int n = dis.n();
  TelescopingReport r;
  double phi_prev = phi_m(n, 0, u), sum = 0.0;
  for (int m = 1; m <= m_max; ++m) {
    const double phi = phi_m(n, m, u);
    const double log_rho = std::log(perceptron_next_pattern_average(dis, u, m).mean);
    const double y = log_rho / n - (phi - phi_prev);
    sum += y;
    const double lhs = perceptron_partition_exact(dis, u, m) / n - phi;
    r.y.push_back(y);
    r.lhs.push_back(lhs);
    r.residual.push_back(std::abs(sum - lhs));
    r.max_residual = std::max(r.max_residual, r.residual.back());
    phi_prev = phi;
  }
  return r;
}

struct CfRow {
  double u = 0.0;
  std::complex<double> empirical;
  double target = 0.0;  // exp(-tau2 u^2 / 2)

  double distance() const { return std::abs(empirical - target); }
};

/// Sample characteristic function of `values` against the centered Gaussian
/// with variance tau2.
inline std::vector<CfRow> empirical_cf(const std::vector<double>& values, const std::vector<double>& us, double tau2) {
  require(!values.empty(), "empirical_cf needs at least one value");
  require(tau2 >= 0.0, "tau2 must be >= 0", "tau2");
  std::vector<CfRow> rows;
  rows.reserve(us.size());
  for (double u : us) {
    double c = 0.0, s = 0.0;
    for (double y : values) {
      c += std::cos(u * y);
      s += std::sin(u * y);
    }
    const double n = static_cast<double>(values.size());
    rows.push_back({u, {c / n, s / n}, std::exp(-0.5 * tau2 * u * u)});
  }
  return rows;
}

/// `count` equispaced points on [-3/tau, 3/tau]; [-3, 3] when tau2 = 0.
inline std::vector<double> cf_grid(double tau2, int count = 11) {
  require(count >= 2, "cf grid needs at least 2 points");
  const double half = tau2 > 0.0 ? 3.0 / std::sqrt(tau2) : 3.0;
  std::vector<double> us(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) us[k] = -half + 2.0 * half * k / (count - 1);
  return us;
}

}  // namespace spinpath
