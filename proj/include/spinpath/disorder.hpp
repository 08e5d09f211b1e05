#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spinpath/csv.hpp"
#include "spinpath/errors.hpp"
#include "spinpath/rng.hpp"

namespace spinpath {

/// Inverse temperature, external field and site count of the SK model.
/// beta = 0 is accepted: it is the decoupled control case.
struct SkParams {
  double beta = 0.05;
  double h = 0.3;
  int n = 8;

  void validate() const {
    require(std::isfinite(beta) && beta >= 0.0, "beta must be >= 0", "beta");
    require(std::isfinite(h) && h >= 0.0, "h must be >= 0", "h");
    require(n >= 1, "n must be >= 1", "n");
  }
};

/// Couplings g_{i,j}, i < j, in row-major upper-triangular order (0-based).
class SkDisorder {
 public:
  explicit SkDisorder(int n) : n_(n), g_(pair_count(n), 0.0) { require(n >= 1, "n must be >= 1", "n"); }

  SkDisorder(int n, std::vector<double> couplings) : n_(n), g_(std::move(couplings)) {
    require(n >= 1, "n must be >= 1", "n");
    require(g_.size() == pair_count(n), "SK disorder must hold n(n-1)/2 couplings");
  }

  static std::size_t pair_count(int n) { return static_cast<std::size_t>(n) * (n - 1) / 2; }

  static SkDisorder sample(int n, NormalStream& normal) {
    SkDisorder d(n);
    for (double& g : d.g_) g = normal();
    return d;
  }

  int n() const noexcept { return n_; }

  std::size_t index(int i, int j) const {
    require(0 <= i && i < j && j < n_, "SK coupling index must satisfy 0 <= i < j < n");
    return static_cast<std::size_t>(i) * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }

  double operator()(int i, int j) const { return g_[index(i, j)]; }
  double& operator()(int i, int j) { return g_[index(i, j)]; }

  const std::vector<double>& couplings() const noexcept { return g_; }

  /// CSV with header `i,j,g`, indices 1-based.
  void write_csv(std::ostream& os) const {
    os << "i,j,g\n";
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) os << (i + 1) << ',' << (j + 1) << ',' << csv::num((*this)(i, j)) << '\n';
  }

  static SkDisorder read_csv(std::istream& is, int n) {
    SkDisorder d(n);
    std::vector<bool> seen(d.g_.size(), false);
    csv::for_each_row(is, "i,j,g", [&](const std::vector<std::string>& f) {
      const int i = csv::to_int(f[0]) - 1, j = csv::to_int(f[1]) - 1;
      const std::size_t k = d.index(i, j);
      d.g_[k] = csv::to_double(f[2]);
      seen[k] = true;
    });
    for (bool s : seen) require(s, "SK disorder CSV is missing couplings");
    return d;
  }

 private:
  int n_;
  std::vector<double> g_;
};

/// Pattern couplings g_{i,k}, stored row-major (site-major): g[i*m + k].
class PerceptronDisorder {
 public:
  PerceptronDisorder(int n, int m) : n_(n), m_(m), g_(static_cast<std::size_t>(n) * m, 0.0) {
    require(n >= 1, "n must be >= 1", "n");
    require(m >= 0, "pattern count must be >= 0", "m");
  }

  PerceptronDisorder(int n, int m, std::vector<double> g) : n_(n), m_(m), g_(std::move(g)) {
    require(n >= 1 && m >= 0, "perceptron disorder needs n >= 1 and m >= 0");
    require(g_.size() == static_cast<std::size_t>(n) * m, "perceptron disorder table must be n x m");
  }

  /// Draws column by column so that a larger m extends a smaller draw.
  static PerceptronDisorder sample(int n, int m, NormalStream& normal) {
    PerceptronDisorder d(n, m);
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < n; ++i) d(i, k) = normal();
    return d;
  }

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }

  double operator()(int i, int k) const { return g_[static_cast<std::size_t>(i) * m_ + k]; }
  double& operator()(int i, int k) { return g_[static_cast<std::size_t>(i) * m_ + k]; }

  std::vector<double> column(int k) const {
    require(0 <= k && k < m_, "pattern index out of range", "k");
    std::vector<double> c(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) c[i] = (*this)(i, k);
    return c;
  }

  /// CSV with header `i,k,g`, indices 1-based.
  void write_csv(std::ostream& os) const {
    os << "i,k,g\n";
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < m_; ++k) os << (i + 1) << ',' << (k + 1) << ',' << csv::num((*this)(i, k)) << '\n';
  }

  static PerceptronDisorder read_csv(std::istream& is, int n, int m) {
    PerceptronDisorder d(n, m);
    std::vector<bool> seen(d.g_.size(), false);
    csv::for_each_row(is, "i,k,g", [&](const std::vector<std::string>& f) {
      const int i = csv::to_int(f[0]) - 1, k = csv::to_int(f[1]) - 1;
      require(0 <= i && i < n && 0 <= k && k < m, "perceptron disorder CSV index out of range");
      d(i, k) = csv::to_double(f[2]);
      seen[static_cast<std::size_t>(i) * m + k] = true;
    });
    for (bool s : seen) require(s, "perceptron disorder CSV is missing entries");
    return d;
  }

 private:
  int n_;
  int m_;
  std::vector<double> g_;
};

}  // namespace spinpath
