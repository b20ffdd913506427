#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gini {

/// Seedable generator whose output stream is identical on every platform.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so the
/// integer, uniform and normal draws are derived here from raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal draw (Box-Muller, one value per call).
  double standard_normal();

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent stream seed from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace gini
