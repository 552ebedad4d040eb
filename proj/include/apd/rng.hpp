// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace apd {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: maps a
/// 128-bit counter and a 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream keyed by (master_seed, stream_id).
///
/// The stream is a pure function of its three fields: the value returned by
/// the n-th call is determined by (master_seed, stream_id, n) alone, so gates
/// can be simulated in any order on any number of workers. Satisfies
/// UniformRandomBitGenerator, which lets Boost.Random distributions draw from
/// it with platform-independent results.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
            std::uint64_t counter = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_;  // index of the next 64-bit output
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<std::uint32_t, 4> cache_{};
};

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

/// Sub-purposes of a gate's randomness. Each gets its own stream so that,
/// e.g., changing the noise level does not perturb the avalanche draws.
enum class StreamPurpose : std::uint8_t {
  photons = 0,
  positions = 1,
  avalanche = 2,
  noise = 3,
  jitter = 4,
};

RngStream gate_stream(std::uint64_t master_seed, std::uint64_t gate_index,
                      StreamPurpose purpose) noexcept;

}  // namespace apd
