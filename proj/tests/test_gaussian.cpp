#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spinpath/gibbs.hpp"
#include "spinpath/ibp.hpp"
#include "spinpath/perceptron_constants.hpp"
#include "spinpath/sk_constants.hpp"

using namespace spinpath;

namespace {

double double_factorial(int k) {
  double v = 1.0;
  for (int j = k; j > 1; j -= 2) v *= j;
  return v;
}

double tanh_sq(double x) {
  const double t = std::tanh(x);
  return t * t;
}

}  // namespace

TEST(Quadrature, NormalizedMoments) {
  for (int n : {2, 8, 64, 128, 256, 512}) {
    const QuadratureRule& r = standard_rule(n);
    EXPECT_NEAR(gh_expect([](double) { return 1.0; }, r), 1.0, 1e-14) << n;
    EXPECT_NEAR(gh_expect([](double x) { return x; }, r), 0.0, 1e-13) << n;
    EXPECT_NEAR(gh_expect([](double x) { return x * x; }, r), 1.0, 1e-12) << n;
  }
}

TEST(Quadrature, ExactOnPolynomialsUpToDegreeTwoNMinusOne) {
  for (int n : {2, 4, 8, 12}) {
    const QuadratureRule& r = standard_rule(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      const double exact = d % 2 ? 0.0 : double_factorial(d - 1);
      const double got = gh_expect([d](double x) { return std::pow(x, d); }, r);
      // Relative to E|Y|^d: odd moments are zero up to cancellation among terms of that size.
      const double scale = gh_expect([d](double x) { return std::pow(std::abs(x), d); }, r);
      EXPECT_LE(std::abs(got - exact), 1e-13 * std::max(1.0, scale)) << "n=" << n << " degree=" << d;
    }
  }
}

TEST(Quadrature, MatchesMonteCarloOnSmoothIntegrand) {
  auto f = [](double x) { return tanh_sq(0.3 * x + 0.3); };
  const double quad = gh_expect(f, standard_rule(64));
  const oracle::McMean mc = oracle::mc_expect(f, 10'000'000, 2718);
  EXPECT_LE(std::abs(quad - mc.mean), 3.0 * mc.std_error);
}

TEST(Quadrature, NonFiniteIntegrandThrows) {
  EXPECT_THROW(gh_expect([](double) { return std::nan(""); }, standard_rule(8)), NumericalError);
}

TEST(Ibp, LinearPsiGivesZero) {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.3, 0.3, 1.0;
  auto psi = [](const Eigen::VectorXd& y) { return 0.5 * y[0] - 1.5 * y[1] + 2.0; };
  auto grad = [](const Eigen::VectorXd&) { return Eigen::Vector2d(0.5, -1.5).eval(); };
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(ibp_residual(psi, grad, cov, i), 0.0, 1e-13);
}

TEST(Ibp, SquareWithIdentityCovarianceGivesZero) {
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
  auto psi = [](const Eigen::VectorXd& y) { return y[1] * y[1]; };
  auto grad = [](const Eigen::VectorXd& y) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(3);
    g[1] = 2.0 * y[1];
    return g;
  };
  EXPECT_NEAR(ibp_residual(psi, grad, cov, 1), 0.0, 1e-13);
}

TEST(Ibp, RandomCubicWithRandomCovariance) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd a(2, 2);
  a << unif(gen), unif(gen), unif(gen), unif(gen);
  const Eigen::MatrixXd cov = a * a.transpose() + 0.2 * Eigen::MatrixXd::Identity(2, 2);
  double c[10];
  for (double& v : c) v = unif(gen);
  auto psi = [&](const Eigen::VectorXd& y) {
    const double x = y[0], z = y[1];
    return c[0] + c[1] * x + c[2] * z + c[3] * x * x + c[4] * x * z + c[5] * z * z + c[6] * x * x * x +
           c[7] * x * x * z + c[8] * x * z * z + c[9] * z * z * z;
  };
  auto grad = [&](const Eigen::VectorXd& y) {
    const double x = y[0], z = y[1];
    Eigen::VectorXd g(2);
    g[0] = c[1] + 2 * c[3] * x + c[4] * z + 3 * c[6] * x * x + 2 * c[7] * x * z + c[8] * z * z;
    g[1] = c[2] + c[4] * x + 2 * c[5] * z + c[7] * x * x + 2 * c[8] * x * z + 3 * c[9] * z * z;
    return g;
  };
  for (int i = 0; i < 2; ++i) {
    const Estimate mc = ibp_residual_mc(psi, grad, cov, i, 1'000'000, 17 + i);
    EXPECT_LT(std::abs(mc.value), 5e-3);
    EXPECT_NEAR(ibp_residual(psi, grad, cov, i), 0.0, 1e-11);
  }
}

TEST(Ibp, RejectsInvalidCovariance) {
  auto psi = [](const Eigen::VectorXd& y) { return y[0]; };
  auto grad = [](const Eigen::VectorXd&) { return Eigen::Vector2d(1.0, 0.0).eval(); };
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(ibp_residual(psi, grad, asym, 0), ValidationError);
  EXPECT_THROW(ibp_residual(psi, grad, indefinite, 0), ValidationError);
}

TEST(SolveQSk, TrivialFixedPoints) {
  EXPECT_EQ(solve_q_sk(0.05, 0.0).q, 0.0);
  EXPECT_EQ(solve_q_sk(0.0, 0.3).q, std::tanh(0.3) * std::tanh(0.3));
}

TEST(SolveQSk, SelfConsistentUnderMonteCarlo) {
  const SkFixedPoint fp = solve_q_sk(0.05, 0.3);
  EXPECT_LT(fp.residual, 1e-12);
  const double a = 0.05 * std::sqrt(fp.q);
  const oracle::McMean mc = oracle::mc_expect([&](double y) { return tanh_sq(a * y + 0.3); }, 10'000'000, 31);
  EXPECT_LE(std::abs(fp.q - mc.mean), 3.0 * mc.std_error);
}

TEST(SolveQSk, StableUnderNodeDoubling) {
  for (double beta : {0.02, 0.05, 0.07})
    for (double h : {0.1, 0.3, 1.0}) {
      const double q64 = solve_q_sk(beta, h, {}, QuadraturePolicy::fixed(64)).q;
      const double q128 = solve_q_sk(beta, h, {}, QuadraturePolicy::fixed(128)).q;
      EXPECT_NEAR(q64, q128, 1e-10);
    }
}

TEST(SolveQSk, NonConvergenceIsNumericalError) {
  FixedPointOptions opt;
  opt.max_iter = 1;
  EXPECT_THROW(solve_q_sk(0.05, 0.3, opt), NumericalError);
  EXPECT_THROW(solve_q_sk(-1.0, 0.3), ValidationError);
}

TEST(SolveQSk, MapSendsUnitIntervalIntoItself) {
  for (double beta : {0.0, 0.05, 1.0, 5.0})
    for (double h : {0.0, 0.3, 3.0})
      for (double q = 0.0; q <= 1.0; q += 0.05) {
        const double t = sk_q_map(beta, h, q);
        EXPECT_GE(t, 0.0);
        EXPECT_LE(t, 1.0);
      }
}

TEST(Beta0, SatisfiesDefiningEquation) {
  const Beta0 b = beta0();
  EXPECT_LE(std::abs(std::sqrt(162.0) * b.value * std::exp(16.0 * b.value * b.value) - 1.0), 1e-10);
  EXPECT_LT(b.residual, 1e-12);
  EXPECT_NEAR(b.value, 0.072, 0.0005);
}

TEST(Beta0, DoublingIterationsKeepsTenDigits) {
  const double a = beta0(50).value, b = beta0(100).value;
  EXPECT_LE(std::abs(a - b), 1e-10 * b);
}

TEST(SkVariances, DegenerateCases) {
  const SkVariances z = sk_variances(0.0, 0.3);
  EXPECT_EQ(z.nu2, 0.0);
  EXPECT_EQ(z.tau2, 0.0);
  const SkVariances h0 = sk_variances(0.05, 0.0);
  EXPECT_EQ(h0.nu2, 0.0);
  EXPECT_EQ(h0.tau2, 0.0);
}

TEST(SkVariances, SmallBetaLeadingOrder) {
  const SkVariances v = sk_variances(0.02, 0.3);
  const double ratio = v.tau2 / (0.5 * 0.02 * 0.02 * v.q * v.q);
  EXPECT_GE(ratio, 0.8);
  EXPECT_LE(ratio, 1.2);
}

TEST(SkVariances, NonNegativeBelowThreshold) {
  const double b0 = beta0().value;
  for (double beta = 0.0; beta <= b0; beta += b0 / 10)
    for (double h : {0.0, 0.1, 0.3, 0.7, 1.5, 3.0}) EXPECT_GE(sk_variances(beta, h).tau2, 0.0) << beta << ' ' << h;
}

TEST(Psi, ConstantPotentialsGiveZero) {
  for (double x : {-1.0, 0.0, 2.0}) {
    EXPECT_EQ(psi_eval(x, 0.7, BoundedU::zero()), 0.0);
    EXPECT_EQ(psi_eval(x, 0.7, BoundedU::constant(0.4)), 0.0);
  }
}

TEST(Psi, LinearPotentialGivesItsSlope) {
  const double a = 0.3;
  const BoundedU lin = BoundedU::custom(
      std::numeric_limits<double>::infinity(), [a](double x) { return a * x; }, [a](double) { return a; },
      [](double) { return 0.0; });
  for (double x : {-1.0, 0.0, 0.5})
    for (double y : {1e-8, 1e-3, 0.5, 1.0}) EXPECT_NEAR(psi_eval(x, y, lin), a, 1e-10) << x << ' ' << y;
}

TEST(Psi, BranchesAgreeAtThreshold) {
  const BoundedU u = BoundedU::scaled_tanh();
  for (double x : {-2.0, -0.3, 0.0, 0.8, 2.5}) {
    const double above = psi_eval(x, kPsiThreshold, u);
    const double below = psi_eval(x, std::nextafter(kPsiThreshold, 0.0), u);
    EXPECT_NEAR(above, below, 1e-8) << x;
  }
}

TEST(PerceptronFp, TrivialCases) {
  const PerceptronFixedPoint z = solve_perceptron_fp(0.05, BoundedU::zero());
  EXPECT_EQ(z.q, 0.0);
  EXPECT_EQ(z.r, 0.0);
  const PerceptronFixedPoint a0 = solve_perceptron_fp(0.0, BoundedU::scaled_tanh());
  EXPECT_EQ(a0.q, 0.0);
  EXPECT_EQ(a0.r, 0.0);
}

TEST(PerceptronFp, ResidualsAndNodeDoubling) {
  const BoundedU u = BoundedU::scaled_tanh();
  const PerceptronFixedPoint fp = solve_perceptron_fp(0.05, u);
  EXPECT_LT(fp.residual_q, 1e-12);
  EXPECT_LT(fp.residual_r, 1e-12);
  EXPECT_GT(fp.q, 0.0);
  const PerceptronFixedPoint f64 = solve_perceptron_fp(0.05, u, {}, QuadraturePolicy::fixed(64));
  const PerceptronFixedPoint f128 = solve_perceptron_fp(0.05, u, {}, QuadraturePolicy::fixed(128));
  EXPECT_NEAR(f64.q, f128.q, 1e-10);
  EXPECT_NEAR(f64.r, f128.r, 1e-10);
}

TEST(XiMoments, TrivialCases) {
  const XiStatistics z = xi_moments(0.1, BoundedU::zero());
  EXPECT_EQ(z.mean, 0.0);
  EXPECT_EQ(z.variance, 0.0);
  const XiStatistics c = xi_moments(0.1, BoundedU::constant(0.15));
  EXPECT_EQ(c.mean, 0.15);
  EXPECT_EQ(c.variance, 0.0);
  EXPECT_EQ(xi_moments(0.0, BoundedU::scaled_tanh()).variance, 0.0);
}

TEST(XiMoments, MomentInequalities) {
  for (double alpha : {0.01, 0.05, 0.125, 0.25}) {
    const XiStatistics s = xi_moments(alpha, BoundedU::scaled_tanh());
    EXPECT_GE(s.variance, 0.0);
    EXPECT_GE(s.fourth_moment + 1e-15, s.variance * s.variance);
  }
}

TEST(PhiM, TrivialCases) {
  EXPECT_NEAR(phi_m(10, 3, BoundedU::zero()), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(phi_m(10, 0, BoundedU::scaled_tanh()), std::numbers::ln2, 1e-15);
}

TEST(PhiM, FiniteSizeGapShrinksLikeOneOverN) {
  // d_N = |Phi(1) - E[log Z_{N,1}] / N| over 500 draws. C is fitted on the
  // other sizes and the bound C/N is then checked out of sample at N = 10.
  const BoundedU u = BoundedU::scaled_tanh();
  auto gap = [&](int n) {
    double acc = 0.0;
    const int draws = 500;
    for (int s = 0; s < draws; ++s) {
      NormalStream normal(derive_seed(7, static_cast<std::uint64_t>(s), streams::disorder));
      acc += perceptron_partition_exact(PerceptronDisorder::sample(n, 1, normal), u, 1) / n;
    }
    return std::abs(phi_m(n, 1, u) - acc / draws);
  };
  double c = 0.0;
  for (int n : {8, 12, 14}) c = std::max(c, n * gap(n));
  EXPECT_LE(gap(10), c / 10.0);
}

TEST(Tau2Perceptron, TrivialCases) {
  EXPECT_EQ(tau2_perceptron(0.1, BoundedU::zero()), 0.0);
  EXPECT_NEAR(simpson_mean(0.3, 16, [](double) { return 0.25; }, 0.25), 0.25, 1e-15);
}

TEST(Tau2Perceptron, StableUnderPanelDoubling) {
  const BoundedU u = BoundedU::scaled_tanh();
  EXPECT_NEAR(tau2_perceptron(0.05, u, 64), tau2_perceptron(0.05, u, 128), 1e-8);
}

TEST(DeltaPhi, ZeroPotential) { EXPECT_EQ(delta_phi_residual(10, 1, BoundedU::zero()), 0.0); }

TEST(DeltaPhi, QuadraticScalingInN) {
  const BoundedU u = BoundedU::scaled_tanh();
  const double alpha = 0.125;
  const double r8 = delta_phi_residual(8, static_cast<int>(std::ceil(alpha * 8)), u);
  const double r16 = delta_phi_residual(16, static_cast<int>(std::ceil(alpha * 16)), u);
  const double ratio = r16 / r8;
  EXPECT_GE(ratio, 1.0 / 6.0);
  EXPECT_LE(ratio, 2.0 / 3.0);
}

TEST(DeltaPhi, FirstPatternBound) {
  const BoundedU u = BoundedU::scaled_tanh();
  for (int n : {32, 64, 128}) EXPECT_LT(std::abs(delta_phi_residual(n, 1, u)), 10.0 / (n * n)) << n;
}
