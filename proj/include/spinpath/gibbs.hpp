#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "spinpath/disorder.hpp"
#include "spinpath/enumerate.hpp"
#include "spinpath/errors.hpp"
#include "spinpath/potential.hpp"
#include "spinpath/spin.hpp"

namespace spinpath {

/// -H(sigma) = sum_{i<j} J_ij sigma_i sigma_j + sum_i f_i sigma_i.
///
/// Covers the SK Hamiltonian (J = beta g / sqrt(N), f = h) and the
/// interpolated Hamiltonian at any path time (J from B(t), f from X(t)).
class IsingModel {
 public:
  IsingModel(int n, std::vector<double> couplings, std::vector<double> fields)
      : n_(n), j_(std::move(couplings)), f_(std::move(fields)) {
    require(n >= 1, "n must be >= 1", "n");
    require(j_.size() == static_cast<std::size_t>(n) * n, "coupling matrix must be n x n");
    require(f_.size() == static_cast<std::size_t>(n), "field vector must have n entries");
  }

  /// Symmetric matrix from upper-triangular pair values, scaled by `scale`.
  static IsingModel from_pairs(int n, std::span<const double> pairs, double scale, std::vector<double> fields) {
    require(pairs.size() == SkDisorder::pair_count(n), "pair table must hold n(n-1)/2 values");
    std::vector<double> j(static_cast<std::size_t>(n) * n, 0.0);
    std::size_t p = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b, ++p) {
        j[static_cast<std::size_t>(a) * n + b] = scale * pairs[p];
        j[static_cast<std::size_t>(b) * n + a] = scale * pairs[p];
      }
    return IsingModel(n, std::move(j), std::move(fields));
  }

  static IsingModel sk(const SkDisorder& dis, const SkParams& p) {
    p.validate();
    require(dis.n() == p.n, "SK disorder size does not match params.n", "n");
    return from_pairs(p.n, dis.couplings(), p.beta / std::sqrt(static_cast<double>(p.n)),
                      std::vector<double>(static_cast<std::size_t>(p.n), p.h));
  }

  int size() const noexcept { return n_; }
  double coupling(int a, int b) const { return j_[static_cast<std::size_t>(a) * n_ + b]; }
  const double* row(int a) const { return j_.data() + static_cast<std::size_t>(a) * n_; }
  double field(int a) const { return f_[static_cast<std::size_t>(a)]; }
  std::vector<double>& fields() noexcept { return f_; }

  double energy(std::span<const int> s) const {
    require(static_cast<int>(s.size()) == n_, "configuration length does not match the model");
    double e = 0.0;
    for (int a = 0; a < n_; ++a) {
      double local = 0.0;
      for (int b = a + 1; b < n_; ++b) local += coupling(a, b) * s[b];
      e += s[a] * (local + field(a));
    }
    return e;
  }

 private:
  int n_;
  std::vector<double> j_;
  std::vector<double> f_;
};

/// Gray-code walker for IsingModel; log weight is -H.
class IsingWalker {
 public:
  explicit IsingWalker(const IsingModel& m)
      : m_(&m), s_(static_cast<std::size_t>(m.size()), 1.0), local_(static_cast<std::size_t>(m.size()), 0.0) {
    resync();
  }

  int size() const noexcept { return m_->size(); }
  double log_weight() const noexcept { return e_; }

  void flip(int k) {
    const int n = size();
    const double sk = s_[k];
    e_ -= 2.0 * sk * (local_[k] + m_->field(k));
    const double* row = m_->row(k);
    for (int j = 0; j < n; ++j) local_[j] -= 2.0 * sk * row[j];
    s_[k] = -sk;
  }

  /// Recomputes local fields and energy from the current spins.
  void resync() {
    const int n = size();
    e_ = 0.0;
    for (int a = 0; a < n; ++a) {
      const double* row = m_->row(a);
      double l = 0.0;
      for (int b = 0; b < n; ++b) l += row[b] * s_[b];
      local_[a] = l;
    }
    for (int a = 0; a < n; ++a) e_ += s_[a] * (0.5 * local_[a] + m_->field(a));
  }

 private:
  const IsingModel* m_;
  std::vector<double> s_;
  std::vector<double> local_;
  double e_ = 0.0;
};

/// Perceptron Hamiltonian -H_{N,m}(sigma) = sum_{k<m} u(S_k), with an
/// optional probe pattern whose field S = N^{-1/2} sum_i b_i sigma_i + offset
/// defines the observable exp(u(S)).
class PerceptronWalker {
 public:
  PerceptronWalker(const PerceptronDisorder& dis, const BoundedU& u, int m)
      : PerceptronWalker(dis, u, m, {}, 0.0) {}

  PerceptronWalker(const PerceptronDisorder& dis, const BoundedU& u, int m, std::span<const double> probe,
                   double offset)
      : n_(dis.n()), m_(m), u_(&u), offset_(offset) {
    require(0 <= m && m <= dis.m(), "pattern count exceeds the disorder table", "m");
    require(probe.empty() || static_cast<int>(probe.size()) == n_, "probe column must have n entries");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    g_.resize(static_cast<std::size_t>(n_) * m_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < m_; ++k) g_[static_cast<std::size_t>(i) * m_ + k] = scale * dis(i, k);
    probe_.reserve(probe.size());
    for (double b : probe) probe_.push_back(scale * b);
    s_.assign(static_cast<std::size_t>(n_), 1.0);
    fields_.assign(static_cast<std::size_t>(m_), 0.0);
    resync();
  }

  int size() const noexcept { return n_; }
  double log_weight() const noexcept { return e_; }
  double observable() const { return std::exp((*u_)(probe_field_)); }

  void flip(int i) {
    const double d = -2.0 * s_[i];
    const double* gi = g_.data() + static_cast<std::size_t>(i) * m_;
    for (int k = 0; k < m_; ++k) fields_[k] += d * gi[k];
    if (!probe_.empty()) probe_field_ += d * probe_[i];
    s_[i] = -s_[i];
    energy();
  }

  void resync() {
    for (int k = 0; k < m_; ++k) {
      double f = 0.0;
      for (int i = 0; i < n_; ++i) f += g_[static_cast<std::size_t>(i) * m_ + k] * s_[i];
      fields_[k] = f;
    }
    probe_field_ = offset_;
    for (std::size_t i = 0; i < probe_.size(); ++i) probe_field_ += probe_[i] * s_[i];
    energy();
  }

 private:
  void energy() {
    double e = 0.0;
    for (int k = 0; k < m_; ++k) e += (*u_)(fields_[k]);
    e_ = e;
  }

  int n_, m_;
  const BoundedU* u_;
  double offset_;
  std::vector<double> g_, probe_, s_, fields_;
  double probe_field_ = 0.0;
  double e_ = 0.0;
};

// ---------------------------------------------------------------------------
// SK model

/// -H_N(sigma) = (beta/sqrt N) sum_{i<j} g_ij sigma_i sigma_j + h sum_i sigma_i.
inline double sk_energy(const SpinConfig& sigma, const SkDisorder& dis, const SkParams& p) {
  p.validate();
  require(sigma.size() == p.n && dis.n() == p.n, "sk_energy: dimension mismatch", "n");
  double pair = 0.0, field = 0.0;
  for (int i = 0; i < p.n; ++i) {
    field += sigma[i];
    for (int j = i + 1; j < p.n; ++j) pair += dis(i, j) * sigma[i] * sigma[j];
  }
  return p.beta / std::sqrt(static_cast<double>(p.n)) * pair + p.h * field;
}

/// log Z with Z split as mantissa * 10^exponent so that Z itself never overflows.
struct PartitionValue {
  double log_z = 0.0;

  double log10_z() const { return log_z / std::log(10.0); }
  double exponent10() const { return std::floor(log10_z()); }
  double mantissa10() const { return std::pow(10.0, log10_z() - exponent10()); }
};

inline PartitionValue sk_partition_exact(const SkDisorder& dis, const SkParams& p, int cap = kEnumerationCap) {
  const IsingModel model = IsingModel::sk(dis, p);
  return {log_partition(IsingWalker(model), cap)};
}

inline GibbsTables gibbs_single_site_expectations(const SkDisorder& dis, const SkParams& p,
                                                  int cap = kEnumerationCap) {
  const IsingModel model = IsingModel::sk(dis, p);
  return gibbs_tables(IsingWalker(model), cap);
}

/// rho(R12), rho(R12^2) and rho((R12 - q)^2) under the two-replica measure.
struct OverlapMoments {
  double r1 = 0.0;
  double r2 = 0.0;
  double centered = 0.0;
};

/// Replica factorization: rho(R) = (1/N) sum_i <s_i>^2,
/// rho(R^2) = (1/N^2) sum_{i,j} <s_i s_j>^2.
inline OverlapMoments overlap_moments(const GibbsTables& t, double q) {
  const double n = t.n;
  double r1 = 0.0, r2 = 0.0;
  for (double m : t.mean) r1 += m * m;
  for (double c : t.corr) r2 += c * c;
  r1 /= n;
  r2 /= n * n;
  return {r1, r2, r2 - 2.0 * q * r1 + q * q};
}

inline OverlapMoments overlap_moments_exact(const SkDisorder& dis, const SkParams& p, double q,
                                            int cap = kEnumerationCap) {
  return overlap_moments(gibbs_single_site_expectations(dis, p, cap), q);
}

// ---------------------------------------------------------------------------
// Perceptron model

/// S_k = N^{-1/2} sum_i g_{i,k} sigma_i (k is 0-based).
inline double perceptron_sk_overlap_fields(const SpinConfig& sigma, const PerceptronDisorder& dis, int k) {
  require(sigma.size() == dis.n(), "perceptron field: dimension mismatch", "n");
  require(0 <= k && k < dis.m(), "pattern index out of range", "k");
  double s = 0.0;
  for (int i = 0; i < dis.n(); ++i) s += dis(i, k) * sigma[i];
  return s / std::sqrt(static_cast<double>(dis.n()));
}

/// log sum_sigma exp(sum_{k<m} u(S_k)) over the counting measure.
inline double perceptron_partition_exact(const PerceptronDisorder& dis, const BoundedU& u, int m,
                                         int cap = kEnumerationCap) {
  return log_partition(PerceptronWalker(dis, u, m), cap);
}

/// rho_{m-1}(exp(u(S_m))): the Gibbs average under the first m-1 patterns of
/// the m-th pattern's Boltzmann factor (m is 1-based here, as in the model).
inline GibbsAverage perceptron_next_pattern_average(const PerceptronDisorder& dis, const BoundedU& u, int m,
                                                    int cap = kEnumerationCap) {
  require(1 <= m && m <= dis.m(), "pattern index out of range", "m");
  const std::vector<double> col = dis.column(m - 1);
  return gibbs_average(PerceptronWalker(dis, u, m - 1, col, 0.0), cap);
}

}  // namespace spinpath
