#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wlac {

/// Seeded generator. Children made with split() depend only on the parent's
/// seed and the tag, never on how many draws the parent has made.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  RandomSource split(std::string_view tag) const;
  RandomSource split(std::string_view tag, std::uint64_t index) const;

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace wlac
