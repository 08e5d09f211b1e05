#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "spinpath/errors.hpp"

namespace spinpath {

/// The perceptron's per-pattern potential u together with u' and u''.
///
/// The default is u(x) = a tanh(x), a = 0.2: u and all its derivatives are
/// globally bounded. Constant potentials (including zero) are tagged so that
/// closed forms can be used where the model decouples.
class BoundedU {
 public:
  using Fn = std::function<double(double)>;

  enum class Kind { constant, scaled_tanh, custom };

  static BoundedU zero() { return constant(0.0); }

  static BoundedU constant(double c) {
    return BoundedU(Kind::constant, std::abs(c), c, [c](double) { return c; }, [](double) { return 0.0; },
                    [](double) { return 0.0; });
  }

  static BoundedU scaled_tanh(double a = 0.2) {
    require(std::isfinite(a), "u-scale must be finite", "u-scale");
    if (a == 0.0) return zero();
    return BoundedU(
        Kind::scaled_tanh, std::abs(a), a, [a](double x) { return a * std::tanh(x); },
        [a](double x) {
          const double c = 1.0 / std::cosh(x);
          return a * c * c;
        },
        [a](double x) {
          const double c = 1.0 / std::cosh(x);
          return -2.0 * a * std::tanh(x) * c * c;
        });
  }

  /// Arbitrary potential. `bound` may be +inf for test-only unbounded choices.
  static BoundedU custom(double bound, Fn u, Fn du, Fn d2u) {
    require(bound > 0.0, "potential bound must be positive");
    return BoundedU(Kind::custom, bound, 0.0, std::move(u), std::move(du), std::move(d2u));
  }

  double operator()(double x) const { return u_(x); }
  double d1(double x) const { return du_(x); }
  double d2(double x) const { return d2u_(x); }

  double bound() const noexcept { return bound_; }
  Kind kind() const noexcept { return kind_; }
  bool is_constant() const noexcept { return kind_ == Kind::constant; }
  /// The constant value for constant potentials, the scale a for scaled tanh.
  double parameter() const noexcept { return param_; }

 private:
  BoundedU(Kind kind, double bound, double param, Fn u, Fn du, Fn d2u)
      : kind_(kind), bound_(bound), param_(param), u_(std::move(u)), du_(std::move(du)), d2u_(std::move(d2u)) {}

  Kind kind_;
  double bound_;
  double param_;
  Fn u_, du_, d2u_;
};

}  // namespace spinpath
