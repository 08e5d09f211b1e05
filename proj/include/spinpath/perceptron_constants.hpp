#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "spinpath/errors.hpp"
#include "spinpath/potential.hpp"
#include "spinpath/quadrature.hpp"
#include "spinpath/sk_constants.hpp"

namespace spinpath {

/// Below this y, Psi uses its integration-by-parts form.
inline constexpr double kPsiThreshold = 1e-6;

/// Psi(x, y) = E[xi e^{u(x + xi y)}] / (y E[e^{u(x + xi y)}]), xi ~ N(0,1).
/// For y < kPsiThreshold the equivalent E[u'(x + xi y) e^u] / E[e^u] is used.
inline double psi_eval(double x, double y, const BoundedU& u, const QuadratureRule& rule = standard_rule(64)) {
  require(y >= 0.0, "psi_eval: y must be >= 0", "y");
  if (u.is_constant()) return 0.0;
  const auto& nodes = rule.nodes();
  const auto& w = rule.weights();
  double num = 0.0, den = 0.0;
  if (y >= kPsiThreshold) {
    // Subtracting e^{u(x)} leaves the value unchanged (E[xi] = 0) but removes
    // the cancellation between large terms at small y.
    const double base = std::exp(u(x));
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double e = std::exp(u(x + nodes[k] * y));
      den += w[k] * e;
      num += w[k] * nodes[k] * (e - base);
    }
    num /= y;
  } else {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double s = x + nodes[k] * y;
      const double e = std::exp(u(s));
      den += w[k] * e;
      num += w[k] * u.d1(s) * e;
    }
  }
  const double v = num / den;
  if (!std::isfinite(v)) throw NumericalError("psi_eval: non-finite value");
  return v;
}

struct PerceptronFixedPoint {
  double q = 0.0;
  double r = 0.0;
  double alpha = 0.0;
  double residual_q = 0.0;  // |q - E[tanh^2(sqrt(r) z)]|
  double residual_r = 0.0;  // |r - alpha E[Psi^2(sqrt(q) z, sqrt(1-q))]|
  int iterations = 0;
};

/// Per-pattern increment statistics: mean and variance Q of
/// xi = log E_hat[exp(u(sqrt(q) eta + sqrt(1-q) eta_hat))], and E[xi^4].
struct XiStatistics {
  double mean = 0.0;
  double variance = 0.0;
  double fourth_moment = 0.0;
};

namespace detail {

inline double perceptron_q_map(double r, const QuadratureRule& rule) {
  return gh_expect_affine(
      [](double x) {
        const double t = std::tanh(x);
        return t * t;
      },
      std::sqrt(r), 0.0, rule);
}

inline double perceptron_r_map(double alpha, double q, const BoundedU& u, const QuadratureRule& rule) {
  const double y = std::sqrt(std::max(0.0, 1.0 - q));
  return alpha * gh_expect_affine(
                     [&](double x) {
                       const double p = psi_eval(x, y, u, rule);
                       return p * p;
                     },
                     std::sqrt(q), 0.0, rule);
}

inline PerceptronFixedPoint solve_perceptron_fixed(double alpha, const BoundedU& u, const FixedPointOptions& opt,
                                                   const QuadratureRule& rule, double q0 = 0.1, double r0 = -1.0) {
  // Psi = 0 forces r = 0 and then q = 0.
  if (alpha == 0.0 || u.is_constant()) return {0.0, 0.0, alpha, 0.0, 0.0, 0};
  double q = q0, r = r0 < 0.0 ? 0.1 * alpha : r0;
  double tr = perceptron_r_map(alpha, q, u, rule);
  for (int it = 0; it < opt.max_iter; ++it) {
    const double tq = perceptron_q_map(r, rule);
    const double rq = std::abs(q - tq), rr = std::abs(r - tr);
    if (rq <= opt.tol && rr <= opt.tol) return {q, r, alpha, rq, rr, it};
    q = std::clamp((1.0 - opt.damping) * q + opt.damping * tq, 0.0, 1.0);
    tr = perceptron_r_map(alpha, q, u, rule);
    r = (1.0 - opt.damping) * r + opt.damping * tr;
  }
  throw NumericalError("solve_perceptron_fp: no convergence after " + std::to_string(opt.max_iter) + " iterations");
}

/// Fixed-point solve across quadrature refinement levels: the first level
/// starts from (0.1, 0.1 alpha), finer levels from the previous solution.
class WarmFixedPoint {
 public:
  WarmFixedPoint(double alpha, const BoundedU& u, FixedPointOptions opt = {}) : alpha_(alpha), u_(&u), opt_(opt) {}

  /// `iterations` in the result counts every level solved so far.
  PerceptronFixedPoint operator()(const QuadratureRule& rule) {
    const int before = has_last_ ? last_.iterations : 0;
    last_ = has_last_ ? solve_perceptron_fixed(alpha_, *u_, opt_, rule, last_.q, last_.r)
                      : solve_perceptron_fixed(alpha_, *u_, opt_, rule);
    last_.iterations += before;
    has_last_ = true;
    return last_;
  }

 private:
  double alpha_;
  const BoundedU* u_;
  FixedPointOptions opt_;
  PerceptronFixedPoint last_{};
  bool has_last_ = false;
};

/// xi as a function of x = sqrt(q) eta.
inline double xi_at(double x, double q, const BoundedU& u, const QuadratureRule& rule) {
  const double y = std::sqrt(std::max(0.0, 1.0 - q));
  return std::log(gh_expect([&](double e) { return std::exp(u(x + y * e)); }, rule));
}

inline XiStatistics xi_moments_fixed(double q, const BoundedU& u, const QuadratureRule& rule) {
  if (u.is_constant()) {
    const double c = u.parameter();
    return {c, 0.0, c * c * c * c};
  }
  if (q == 0.0) {
    const double v = xi_at(0.0, 0.0, u, rule);
    return {v, 0.0, v * v * v * v};
  }
  const double a = std::sqrt(q);
  const auto& nodes = rule.nodes();
  const auto& w = rule.weights();
  std::vector<double> xi(nodes.size());
  double mean = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    xi[k] = xi_at(a * nodes[k], q, u, rule);
    mean += w[k] * xi[k];
  }
  double var = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double d = xi[k] - mean;
    const double sq = xi[k] * xi[k];
    var += w[k] * d * d;
    m4 += w[k] * sq * sq;
  }
  return {mean, var, m4};
}

/// Phi-hat(alpha) given a solved fixed point at that alpha and E[xi].
inline double phi_from(const PerceptronFixedPoint& fp, double mean_xi, const QuadratureRule& rule) {
  const double elc = gh_expect_affine(log_cosh, std::sqrt(fp.r), 0.0, rule);
  return std::numbers::ln2 + elc - 0.5 * fp.r * (1.0 - fp.q) + fp.alpha * mean_xi;
}

struct PhiParts {
  double phi = 0.0;
  double mean_xi = 0.0;
};

inline PhiParts phi_fixed(const PerceptronFixedPoint& fp, const BoundedU& u, const QuadratureRule& rule) {
  const double mx = xi_moments_fixed(fp.q, u, rule).mean;
  return {phi_from(fp, mx, rule), mx};
}

}  // namespace detail

/// Solves q = E[tanh^2(sqrt(r) z)], r = alpha E[Psi^2(sqrt(q) z, sqrt(1-q))]
/// by damped alternating updates from (q, r) = (0.1, 0.1 alpha).
inline PerceptronFixedPoint solve_perceptron_fp(double alpha, const BoundedU& u, const FixedPointOptions& opt = {},
                                                const QuadraturePolicy& quad = {}) {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0", "alpha");
  return refine(
      quad, detail::WarmFixedPoint(alpha, u, opt),
      [](const PerceptronFixedPoint& a, const PerceptronFixedPoint& b) {
        return std::max(std::abs(a.q - b.q), std::abs(a.r - b.r));
      });
}

/// Statistics of xi_m at alpha_m = alpha; Q(alpha) is the variance.
inline XiStatistics xi_moments(double alpha, const BoundedU& u, const QuadraturePolicy& quad = {}) {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0", "alpha");
  detail::WarmFixedPoint solve(alpha, u);
  return refine(
      quad, [&](const QuadratureRule& rule) { return detail::xi_moments_fixed(solve(rule).q, u, rule); },
      [](const XiStatistics& a, const XiStatistics& b) {
        return std::max({std::abs(a.mean - b.mean), std::abs(a.variance - b.variance),
                         std::abs(a.fourth_moment - b.fourth_moment)});
      });
}

/// Replica-symmetric free energy as a function of alpha:
/// log 2 + E[log cosh(sqrt(r) Y)] - r (1 - q) / 2 + alpha E[xi].
inline double phi_alpha(double alpha, const BoundedU& u, const QuadraturePolicy& quad = {}) {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0", "alpha");
  detail::WarmFixedPoint solve(alpha, u);
  return refine_scalar(quad, [&](const QuadratureRule& rule) { return detail::phi_fixed(solve(rule), u, rule).phi; });
}

/// Phi(m) = Phi-hat(m / N).
inline double phi_m(int n, int m, const BoundedU& u, const QuadraturePolicy& quad = {}) {
  require(n >= 1, "n must be >= 1", "n");
  require(m >= 0, "m must be >= 0", "m");
  return phi_alpha(static_cast<double>(m) / n, u, quad);
}

/// (1/alpha) int_0^alpha Q(x) dx by composite Simpson: `panels` subintervals,
/// each with its midpoint. Q(0) = 0 is used at the left end.
template <class QFn>
double simpson_mean(double alpha, int panels, QFn&& q_of, double q_at_zero = 0.0) {
  require(alpha > 0.0, "alpha must be > 0", "alpha");
  require(panels >= 1, "panels must be >= 1", "panels");
  const double h = alpha / panels;
  double acc = q_at_zero;
  for (int k = 0; k < panels; ++k) {
    const double right = (k + 1 == panels) ? alpha : (k + 1) * h;
    const double qr = q_of(right);
    acc += 4.0 * q_of((k + 0.5) * h) + (k + 1 == panels ? qr : 2.0 * qr);
  }
  return acc * h / 6.0 / alpha;
}

/// Limiting perceptron variance (1/alpha) int_0^alpha Q(x) dx.
inline double tau2_perceptron(double alpha, const BoundedU& u, int panels = 64, const QuadraturePolicy& quad = {}) {
  if (u.is_constant()) return 0.0;
  return simpson_mean(alpha, panels, [&](double x) { return xi_moments(x, u, quad).variance; });
}

/// Phi(m) - Phi(m-1) - E[xi_m] / N, all at one quadrature rule per level.
inline double delta_phi_residual(int n, int m, const BoundedU& u, const QuadraturePolicy& quad = {}) {
  require(n >= 1, "n must be >= 1", "n");
  require(m >= 1, "m must be >= 1", "m");
  if (u.is_constant()) {
    // Phi-hat(alpha) = log 2 + alpha c and E[xi] = c: the residual vanishes.
    return 0.0;
  }
  const double a1 = static_cast<double>(m) / n, a0 = static_cast<double>(m - 1) / n;
  detail::WarmFixedPoint solve1(a1, u), solve0(a0, u);
  return refine_scalar(quad, [&](const QuadratureRule& rule) {
    const detail::PhiParts p1 = detail::phi_fixed(solve1(rule), u, rule);
    const detail::PhiParts p0 = detail::phi_fixed(solve0(rule), u, rule);
    return (p1.phi - p0.phi) - p1.mean_xi / n;
  });
}

}  // namespace spinpath
