#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "spinpath/errors.hpp"

namespace spinpath::stats {

inline double mean(std::span<const double> x) {
  require(!x.empty(), "mean of an empty sample");
  double m = 0.0;
  for (double v : x) m += v;
  return m / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  require(x.size() >= 2, "variance needs at least 2 values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double std_error(std::span<const double> x) { return std::sqrt(variance(x) / static_cast<double>(x.size())); }

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  bool intersects(double a, double b) const { return lo <= b && a <= hi; }
};

/// Percentile bootstrap interval for the sample variance.
inline Interval bootstrap_variance_ci(std::span<const double> x, std::uint64_t seed, int resamples = 1000,
                                      double level = 0.95) {
  require(x.size() >= 2, "bootstrap needs at least 2 values");
  require(resamples >= 2, "bootstrap needs at least 2 resamples", "resamples");
  require(level > 0.0 && level < 1.0, "confidence level must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<double> draw(x.size()), vars(static_cast<std::size_t>(resamples));
  for (double& v : vars) {
    for (double& d : draw) d = x[pick(rng)];
    v = variance(draw);
  }
  std::sort(vars.begin(), vars.end());
  // Nearest-rank percentiles.
  const double tail = 0.5 * (1.0 - level);
  auto rank = [&](double p) {
    const double r = std::ceil(p * resamples) - 1.0;
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(resamples - 1)));
  };
  return {vars[rank(tail)], vars[rank(1.0 - tail)]};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Kolmogorov-Smirnov distance between the standardized sample and N(0,1).
/// NaN when the sample has zero spread.
inline double ks_distance_normal(std::span<const double> x) {
  require(x.size() >= 2, "KS distance needs at least 2 values");
  const double m = mean(x);
  const double sd = std::sqrt(variance(x));
  if (!(sd > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> z(x.begin(), x.end());
  for (double& v : z) v = (v - m) / sd;
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = normal_cdf(z[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic 5% critical value of the one-sample KS statistic.
inline double ks_critical_5pct(std::size_t n) { return 1.358 / std::sqrt(static_cast<double>(n)); }

}  // namespace spinpath::stats
