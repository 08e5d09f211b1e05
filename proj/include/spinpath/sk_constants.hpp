#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "spinpath/errors.hpp"
#include "spinpath/quadrature.hpp"

namespace spinpath {

/// Damped fixed-point iteration x <- (1 - damping) x + damping T(x).
struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-12;
  int max_iter = 10000;
};

struct SkFixedPoint {
  double q = 0.0;
  double residual = 0.0;  // |q - T(q)|
  int iterations = 0;
};

namespace detail {

inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

inline double sk_map(double beta, double h, double q, const QuadratureRule& rule) {
  return gh_expect_affine(
      [](double x) {
        const double t = std::tanh(x);
        return t * t;
      },
      beta * std::sqrt(q), h, rule);
}

inline SkFixedPoint solve_q_sk_fixed(double beta, double h, const FixedPointOptions& opt, const QuadratureRule& rule) {
  if (beta == 0.0) {
    // T is constant: q = tanh^2(h).
    const double t = std::tanh(h);
    return {t * t, 0.0, 0};
  }
  const double th = std::tanh(h);
  double q = th * th;
  for (int it = 0; it < opt.max_iter; ++it) {
    const double t = sk_map(beta, h, q, rule);
    const double res = std::abs(q - t);
    if (res <= opt.tol) return {q, res, it};
    q = (1.0 - opt.damping) * q + opt.damping * t;
  }
  throw NumericalError("solve_q_sk: no convergence after " + std::to_string(opt.max_iter) + " iterations");
}

}  // namespace detail

/// T(q) = E[tanh^2(beta sqrt(q) Y + h)].
inline double sk_q_map(double beta, double h, double q, const QuadratureRule& rule = standard_rule(64)) {
  require(q >= 0.0, "q must be >= 0", "q");
  return detail::sk_map(beta, h, q, rule);
}

/// The replica-symmetric overlap q = E[tanh^2(beta sqrt(q) Y + h)].
inline SkFixedPoint solve_q_sk(double beta, double h, const FixedPointOptions& opt = {},
                               const QuadraturePolicy& quad = {}) {
  require(std::isfinite(beta) && beta >= 0.0, "beta must be >= 0", "beta");
  require(std::isfinite(h) && h >= 0.0, "h must be >= 0", "h");
  return refine(
      quad, [&](const QuadratureRule& rule) { return detail::solve_q_sk_fixed(beta, h, opt, rule); },
      [](const SkFixedPoint& a, const SkFixedPoint& b) { return std::abs(a.q - b.q); });
}

/// Root of sqrt(162) beta e^{16 beta^2} = 1, by bisection on [0, 0.1].
struct Beta0 {
  double value = 0.0;
  double residual = 0.0;  // |sqrt(162) beta0 e^{16 beta0^2} - 1|
};

inline double beta0_map(double beta) { return std::sqrt(162.0) * beta * std::exp(16.0 * beta * beta); }

inline Beta0 beta0(int iterations = 200) {
  double lo = 0.0, hi = 0.1;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (beta0_map(mid) < 1.0 ? lo : hi) = mid;
  }
  const double b = std::abs(beta0_map(lo) - 1.0) <= std::abs(beta0_map(hi) - 1.0) ? lo : hi;
  return {b, std::abs(beta0_map(b) - 1.0)};
}

/// E[Phi(Y)] with Phi(x) = log cosh(beta sqrt(q) x + h).
inline double expected_log_cosh(double beta, double h, double q, const QuadraturePolicy& quad = {}) {
  return refine_scalar(quad, [&](const QuadratureRule& rule) {
    return gh_expect_affine(detail::log_cosh, beta * std::sqrt(q), h, rule);
  });
}

struct SkVariances {
  double q = 0.0;
  double nu2 = 0.0;   // Var(log cosh(beta sqrt(q) Y + h))
  double tau2 = 0.0;  // nu2 - beta^2 q^2 / 2
};

/// Limiting variance of the SK free-energy fluctuations.
inline SkVariances sk_variances(double beta, double h, const QuadraturePolicy& quad = {}) {
  const SkFixedPoint fp = solve_q_sk(beta, h, {}, quad);
  const double slope = beta * std::sqrt(fp.q);
  const double nu2 = refine_scalar(
      quad, [&](const QuadratureRule& rule) { return gh_variance_affine(detail::log_cosh, slope, h, rule); });
  return {fp.q, nu2, nu2 - 0.5 * beta * beta * fp.q * fp.q};
}

}  // namespace spinpath
