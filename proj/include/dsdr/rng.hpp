#pragma once

#include <cstdint>

namespace dsdr {

/// xoshiro256** seeded through splitmix64.
///
/// Every stream in the project is derived from a single 64-bit seed, so runs
/// are reproducible across platforms and standard-library implementations
/// (unlike std::normal_distribution or std::shuffle).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via the inverse CDF of uniform(); one uniform per variate.
  double normal();

 private:
  std::uint64_t s_[4];
};

/// Inverse standard-normal CDF (Wichura's AS 241, ~1e-16 relative accuracy).
double normal_quantile(double p);

/// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed);

}  // namespace dsdr
