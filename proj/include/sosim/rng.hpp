#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace sosim {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over bytes; used to turn stream names into seeds.
std::uint64_t fnv1a64(std::string_view bytes);

/// Seed of the i-th run of a sweep:
///   mix64(base_seed XOR (run_index + 1) * 0x9E3779B97F4A7C15)
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run_index);

/// xoshiro256** with portable draw helpers. Every random draw in the
/// simulator goes through this type so a run is a pure function of its seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  /// Independent stream for (name, index), e.g. a behavior at a given tick.
  static Rng substream(std::uint64_t root_seed, std::string_view name, std::uint64_t index);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace sosim
