#pragma once

// Exact enumeration over {-1,+1}^N.
//
// Configurations are visited in Gray-code order so that consecutive states
// differ by one spin flip and a walker can update its energy in O(N). The
// stream is cut into blocks of 2^b states sharing their high bits; within a
// block the Boltzmann weights are exponentiated against the block maximum and
// a Walsh-Hadamard transform yields every sum_sigma w(sigma) prod_{i in S}
// sigma_i for subsets S of the low sites. Block results are merged into
// log-shifted accumulators, so no 2^N buffer is ever held.
//
// Spin convention: bit i set <=> sigma_i = -1. The walker starts at all +1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spinpath/errors.hpp"

namespace spinpath {

inline constexpr int kEnumerationCap = 24;
inline constexpr int kBlockBits = 12;

/// A walker over {-1,+1}^N whose state follows single-spin flips.
template <class W>
concept SpinWalker = requires(W w, const W cw, int k) {
  { cw.size() } -> std::convertible_to<int>;
  { cw.log_weight() } -> std::convertible_to<double>;
  w.flip(k);
  w.resync();
};

/// A walker that also exposes a per-configuration observable to be averaged.
template <class W>
concept ObservableWalker = SpinWalker<W> && requires(const W cw) {
  { cw.observable() } -> std::convertible_to<double>;
};

inline void check_enumerable(int n, int cap) {
  require(n >= 1, "enumeration needs n >= 1", "n");
  require(n <= cap, "n = " + std::to_string(n) + " exceeds the enumeration cap " + std::to_string(cap), "n");
  require(cap <= 62, "enumeration cap must be <= 62");
}

namespace detail {

/// In-place unnormalized Walsh-Hadamard transform:
/// out[S] = sum_x in[x] (-1)^{popcount(x & S)}.
inline void walsh_hadamard(std::span<double> a) {
  const std::size_t n = a.size();
  for (std::size_t len = 1; len < n; len <<= 1)
    for (std::size_t i = 0; i < n; i += len << 1)
      for (std::size_t j = i; j < i + len; ++j) {
        const double u = a[j], v = a[j + len];
        a[j] = u + v;
        a[j + len] = u - v;
      }
}

/// Walks every configuration; calls `fn(log_weights, observables, high_bits, b)`
/// once per block. Arrays are indexed by the low b bits of the configuration.
template <SpinWalker W, class BlockFn>
void for_each_block(W& walker, BlockFn&& fn) {
  constexpr bool with_obs = ObservableWalker<W>;
  const int n = walker.size();
  const int b = std::min(n, kBlockBits);
  const std::uint64_t block = std::uint64_t{1} << b;
  const std::uint64_t blocks = std::uint64_t{1} << (n - b);
  std::vector<double> logw(block);
  std::vector<double> obs(with_obs ? block : 0);
  std::uint64_t g = 0;
  for (std::uint64_t blk = 0; blk < blocks; ++blk) {
    const std::uint64_t high = ((g ^ (g >> 1)) >> b);
    for (std::uint64_t l = 0; l < block; ++l, ++g) {
      if (g != 0) walker.flip(std::countr_zero(g));
      if (l == 0) walker.resync();
      const std::uint64_t low = (g ^ (g >> 1)) & (block - 1);
      logw[low] = walker.log_weight();
      if constexpr (with_obs) obs[low] = walker.observable();
    }
    fn(std::span<double>(logw), std::span<const double>(obs), high, b);
  }
}

/// Rescales a set of accumulators so they stay relative to the running max.
struct LogShift {
  double shift = -std::numeric_limits<double>::infinity();

  /// Returns the factor for a block expressed relative to exp(block_max);
  /// calls `rescale(f)` on existing accumulators when the max moves up.
  template <class Rescale>
  double absorb(double block_max, Rescale&& rescale) {
    if (block_max > shift) {
      if (std::isfinite(shift)) rescale(std::exp(shift - block_max));
      shift = block_max;
      return 1.0;
    }
    return std::exp(block_max - shift);
  }
};

inline double exponentiate(std::span<double> logw) {
  const double mx = *std::max_element(logw.begin(), logw.end());
  for (double& v : logw) v = std::exp(v - mx);
  return mx;
}

}  // namespace detail

/// Exact single- and two-site Gibbs averages with log Z.
struct GibbsTables {
  int n = 0;
  double log_z = 0.0;
  std::vector<double> mean;  // <sigma_i>
  std::vector<double> corr;  // <sigma_i sigma_j>, n*n row-major, diagonal 1

  double spin(int i) const { return mean[static_cast<std::size_t>(i)]; }
  double pair(int i, int j) const { return corr[static_cast<std::size_t>(i) * n + j]; }
};

/// log Z = log sum_sigma exp(log_weight(sigma)) by streaming log-sum-exp.
template <SpinWalker W>
double log_partition(W walker, int cap = kEnumerationCap) {
  check_enumerable(walker.size(), cap);
  detail::LogShift shift;
  double z = 0.0;
  detail::for_each_block(walker, [&](std::span<double> logw, std::span<const double>, std::uint64_t, int) {
    const double mx = detail::exponentiate(logw);
    double s = 0.0;
    for (double v : logw) s += v;
    const double f = shift.absorb(mx, [&](double r) { z *= r; });
    z += f * s;
  });
  return shift.shift + std::log(z);
}

/// Gibbs average of the walker's observable, together with log Z.
struct GibbsAverage {
  double log_z = 0.0;
  double mean = 0.0;
};

template <ObservableWalker W>
GibbsAverage gibbs_average(W walker, int cap = kEnumerationCap) {
  check_enumerable(walker.size(), cap);
  detail::LogShift shift;
  double z = 0.0, a = 0.0;
  detail::for_each_block(walker, [&](std::span<double> logw, std::span<const double> obs, std::uint64_t, int) {
    const double mx = detail::exponentiate(logw);
    double s = 0.0, so = 0.0;
    for (std::size_t k = 0; k < logw.size(); ++k) {
      s += logw[k];
      so += logw[k] * obs[k];
    }
    const double f = shift.absorb(mx, [&](double r) {
      z *= r;
      a *= r;
    });
    z += f * s;
    a += f * so;
  });
  return {shift.shift + std::log(z), a / z};
}

/// Full one- and two-site tables.
template <SpinWalker W>
GibbsTables gibbs_tables(W walker, int cap = kEnumerationCap) {
  const int n = walker.size();
  check_enumerable(n, cap);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  detail::LogShift shift;
  double z = 0.0;
  std::vector<double> s1(static_cast<std::size_t>(n), 0.0), s2(nn, 0.0);
  std::vector<double> sigma_high(static_cast<std::size_t>(n), 0.0);

  detail::for_each_block(walker, [&](std::span<double> logw, std::span<const double>, std::uint64_t high, int b) {
    const double mx = detail::exponentiate(logw);
    detail::walsh_hadamard(logw);
    const double f = shift.absorb(mx, [&](double r) {
      z *= r;
      for (double& v : s1) v *= r;
      for (double& v : s2) v *= r;
    });
    const std::span<const double> F = logw;
    const double total = f * F[0];
    z += total;
    for (int i = b; i < n; ++i) sigma_high[i] = ((high >> (i - b)) & 1U) ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) {
      const double si = i < b ? f * F[std::size_t{1} << i] : sigma_high[i] * total;
      s1[i] += si;
      for (int j = i + 1; j < n; ++j) {
        double sij;
        if (j < b)
          sij = f * F[(std::size_t{1} << i) | (std::size_t{1} << j)];
        else if (i < b)
          sij = sigma_high[j] * si;
        else
          sij = sigma_high[i] * sigma_high[j] * total;
        s2[static_cast<std::size_t>(i) * n + j] += sij;
      }
    }
  });

  GibbsTables t;
  t.n = n;
  t.log_z = shift.shift + std::log(z);
  t.mean.resize(static_cast<std::size_t>(n));
  t.corr.assign(nn, 0.0);
  for (int i = 0; i < n; ++i) {
    t.mean[i] = s1[i] / z;
    t.corr[static_cast<std::size_t>(i) * n + i] = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double c = s2[static_cast<std::size_t>(i) * n + j] / z;
      t.corr[static_cast<std::size_t>(i) * n + j] = c;
      t.corr[static_cast<std::size_t>(j) * n + i] = c;
    }
  }
  return t;
}

}  // namespace spinpath
