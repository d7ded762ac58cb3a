#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mmsim {

/// Deterministic seed for stream `index` under `master`. Distinct indices give
/// statistically independent mt19937_64 streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seedable random source. All samplers are implemented here on top of the
/// raw 64-bit engine output, so sequences do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on [low, high).
  double uniform(double low, double high) { return low + (high - low) * uniform(); }

  /// Standard normal (Marsaglia polar method; the second variate is cached).
  double normal();

  /// Poisson with the given mean. Inversion for small means, PTRS
  /// transformed rejection for mean >= 10.
  std::int64_t poisson(double mean);

  /// Index drawn proportionally to `weights`; `total` must equal their sum
  /// and be positive.
  std::size_t categorical(std::span<const double> weights, double total);

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mmsim
