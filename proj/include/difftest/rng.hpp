#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace difftest {

/// SplitMix64 finaliser; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stable 64-bit hash of a string (FNV-1a followed by mix64).
std::uint64_t hash_tag(std::string_view tag) noexcept;

/// Derives a child seed from a parent seed and an ordered list of keys.
/// Used to key every replication of a Monte Carlo run by
/// (master_seed, model, n, h, replication, attempt), so that no two
/// simulations share a stream and results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys) noexcept;

/// xoshiro256** generator seeded through SplitMix64.
///
/// Standard normal variates use the Marsaglia polar method with the spare
/// value cached. The generator is fully specified here (no dependence on the
/// standard library's distribution implementations), so fixed seeds yield
/// the same streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;

  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace difftest
