#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spinpath/errors.hpp"

namespace spinpath {

/// Gauss-Hermite nodes and weights for the standard normal density:
/// sum_k w_k f(x_k) ~ E[f(Y)], Y ~ N(0,1). Weights sum to one.
class QuadratureRule {
 public:
  explicit QuadratureRule(int n) : nodes_(static_cast<std::size_t>(n)), weights_(static_cast<std::size_t>(n)) {
    require(n >= 2, "quadrature needs at least 2 nodes");
    build(n);
  }

  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  // Golub-Welsch eigenvalues of the Jacobi matrix for the physicists'
  // weight exp(-x^2), polished by Newton steps on the orthonormal
  // recurrence; weights from the Christoffel formula. Rescaled to N(0,1).
  void build(int n) {
    constexpr double pim4 = 0.7511255444649425;  // pi^{-1/4}
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(n - 1);
    for (int j = 1; j < n; ++j) off[j - 1] = std::sqrt(0.5 * j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("Jacobi eigenvalue solve failed");

    auto eval = [&](double z) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      return std::pair{p1, std::sqrt(2.0 * n) * p2};
    };

    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double z = eig.eigenvalues()[i];
      for (int it = 0; it < 3; ++it) {
        const auto [p, dp] = eval(z);
        if (!std::isfinite(p) || !std::isfinite(dp) || dp == 0.0) break;
        z -= p / dp;
      }
      const double dp = eval(z).second;
      x[static_cast<std::size_t>(i)] = z;
      w[static_cast<std::size_t>(i)] = std::isfinite(dp) ? 2.0 / (dp * dp) : 0.0;
    }
    // Exact symmetry about the origin.
    for (int i = 0; i < n / 2; ++i) {
      const std::size_t a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(n - 1 - i);
      const double xs = 0.5 * (x[b] - x[a]);
      const double ws = 0.5 * (w[a] + w[b]);
      x[a] = -xs;
      x[b] = xs;
      w[a] = w[b] = ws;
    }
    if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
    double total = 0.0;
    for (double v : w) total += v;
    for (int k = 0; k < n; ++k) {
      nodes_[static_cast<std::size_t>(k)] = std::numbers::sqrt2 * x[static_cast<std::size_t>(k)];
      weights_[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k)] / total;
    }
  }

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Shared, immutable rule for `n` nodes. Thread-safe.
inline const QuadratureRule& standard_rule(int n) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, QuadratureRule(n)).first;
  return it->second;
}

/// E[f(Y)] by the quadrature sum. Throws on a non-finite integrand value.
template <class F>
double gh_expect(F&& f, const QuadratureRule& rule) {
  const auto& x = rule.nodes();
  const auto& w = rule.weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (w[k] == 0.0) continue;
    const double v = f(x[k]);
    if (!std::isfinite(v)) throw NumericalError("integrand is not finite at node " + std::to_string(x[k]));
    acc += w[k] * v;
  }
  return acc;
}

/// E[f(a Y + b)]. With a = 0 the argument is deterministic and f(b) is
/// returned exactly.
template <class F>
double gh_expect_affine(F&& f, double a, double b, const QuadratureRule& rule) {
  if (a == 0.0) {
    const double v = f(b);
    if (!std::isfinite(v)) throw NumericalError("integrand is not finite");
    return v;
  }
  return gh_expect([&](double y) { return f(a * y + b); }, rule);
}

/// Var(f(a Y + b)) by two passes; exactly 0 when a = 0.
template <class F>
double gh_variance_affine(F&& f, double a, double b, const QuadratureRule& rule) {
  if (a == 0.0) return 0.0;
  const double mean = gh_expect([&](double y) { return f(a * y + b); }, rule);
  return gh_expect(
      [&](double y) {
        const double d = f(a * y + b) - mean;
        return d * d;
      },
      rule);
}

/// How Gaussian expectations are evaluated: a fixed node count, or doubling
/// from `nodes` up to `max_nodes` until successive results agree within `tol`.
struct QuadraturePolicy {
  int nodes = 64;
  bool adaptive = true;
  int max_nodes = 512;
  double tol = 1e-12;

  static QuadraturePolicy fixed(int n) { return {n, false, n, 0.0}; }
};

/// Runs `compute(rule)` under the policy. `distance(a, b)` compares two
/// successive results. Returns the result at the finest rule evaluated.
template <class Compute, class Distance>
auto refine(const QuadraturePolicy& policy, Compute&& compute, Distance&& distance) {
  require(policy.nodes >= 2, "quadrature needs at least 2 nodes");
  auto prev = compute(standard_rule(policy.nodes));
  if (!policy.adaptive) return prev;
  for (int n = 2 * policy.nodes; n <= policy.max_nodes; n *= 2) {
    auto next = compute(standard_rule(n));
    const bool close = distance(prev, next) < policy.tol;
    prev = std::move(next);
    if (close) break;
  }
  return prev;
}

template <class Compute>
double refine_scalar(const QuadraturePolicy& policy, Compute&& compute) {
  return refine(policy, std::forward<Compute>(compute), [](double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
  });
}

}  // namespace spinpath
