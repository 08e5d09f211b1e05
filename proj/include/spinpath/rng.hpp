#pragma once

#include <cstdint>
#include <random>

namespace spinpath {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for task `index` of stream `stream` under `master`. Depends only on
/// the triple, never on which worker runs the task.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t stream = 0) noexcept {
  return mix64(mix64(master ^ mix64(stream)) + index);
}

/// Distinct stream tags so disorder, paths and bootstrap never share seeds.
namespace streams {
inline constexpr std::uint64_t disorder = 1;
inline constexpr std::uint64_t path = 2;
inline constexpr std::uint64_t bootstrap = 3;
inline constexpr std::uint64_t monte_carlo = 4;
}  // namespace streams

/// Seeded source of i.i.d. standard normals. Owns its engine, so one
/// instance per task keeps tasks independent.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  double operator()() { return dist_(engine_); }
  double operator()(double sd) { return sd * dist_(engine_); }

  std::uint64_t seed() const noexcept { return seed_; }
  Rng& engine() noexcept { return engine_; }

 private:
  Rng engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
  std::uint64_t seed_;
};

}  // namespace spinpath
