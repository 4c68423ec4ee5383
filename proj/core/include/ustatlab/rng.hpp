#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (master seed, substream id, lane, draw index), so replicas computed on
// different workers see identical streams.

#include <array>
#include <cstdint>
#include <limits>

namespace ustat {

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3").
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// One substream. `lane` separates independent purposes inside a replica
/// (data, decoupled copies, sampling design, ...).
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint32_t lane = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next_u64(); }
  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  /// Uniform integer on [0, bound); bound > 0. Rejection sampling, no
  /// modulo bias.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via Box-Muller (both variates used).
  double normal() noexcept;
  /// +1 or -1 with probability 1/2.
  double sign() noexcept { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

  std::uint64_t draws() const noexcept { return block_index_; }

 private:
  void refill() noexcept;

  Philox4x32::Key key_{};
  std::uint64_t stream_ = 0;
  std::uint32_t lane_ = 0;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer; used to derive substream ids from structured tags.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ustat
