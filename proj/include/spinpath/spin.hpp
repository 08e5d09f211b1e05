#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spinpath/errors.hpp"

namespace spinpath {

/// One configuration in {-1,+1}^N.
class SpinConfig {
 public:
  explicit SpinConfig(std::vector<int> spins) : spins_(std::move(spins)) {
    require(!spins_.empty(), "spin configuration must have at least one site");
    for (int s : spins_) require(s == 1 || s == -1, "spins must be exactly -1 or +1");
  }

  /// Bit i set means sigma_i = -1. This is the enumeration convention.
  static SpinConfig from_bits(int n, std::uint64_t bits) {
    std::vector<int> s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[i] = ((bits >> i) & 1U) ? -1 : 1;
    return SpinConfig(std::move(s));
  }

  static SpinConfig all_up(int n) { return SpinConfig(std::vector<int>(static_cast<std::size_t>(n), 1)); }

  int size() const noexcept { return static_cast<int>(spins_.size()); }
  int operator[](int i) const { return spins_[static_cast<std::size_t>(i)]; }
  std::span<const int> spins() const noexcept { return spins_; }

  SpinConfig flipped() const {
    std::vector<int> s(spins_);
    for (int& v : s) v = -v;
    return SpinConfig(std::move(s));
  }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  std::vector<int> spins_;
};

/// R_{12} = (1/N) sum_i s1_i s2_i.
inline double overlap(const SpinConfig& s1, const SpinConfig& s2) {
  require(s1.size() == s2.size(), "overlap: configurations differ in length");
  long acc = 0;
  for (int i = 0; i < s1.size(); ++i) acc += s1[i] * s2[i];
  return static_cast<double>(acc) / s1.size();
}

}  // namespace spinpath
