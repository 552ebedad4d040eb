// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/rng.hpp"

namespace apd {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, ctr[0], hi0, lo0);
  mulhilo(kMul1, ctr[2], hi1, lo1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  philox_round(counter, key);
  for (int round = 1; round < 10; ++round) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    philox_round(counter, key);
  }
  return counter;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
                     std::uint64_t counter) noexcept
    : master_seed_(master_seed), stream_id_(stream_id), counter_(counter) {}

RngStream::result_type RngStream::operator()() noexcept {
  const std::uint64_t block = counter_ >> 1;
  if (block != cached_block_) {
    cache_ = philox4x32(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(stream_id_),
         static_cast<std::uint32_t>(stream_id_ >> 32)},
        {static_cast<std::uint32_t>(master_seed_),
         static_cast<std::uint32_t>(master_seed_ >> 32)});
    cached_block_ = block;
  }
  const auto& out = cache_;
  const unsigned lane = static_cast<unsigned>(counter_ & 1u) * 2;
  ++counter_;
  return (static_cast<std::uint64_t>(out[lane + 1]) << 32) | out[lane];
}

double RngStream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept {
  return RngStream(master_seed, stream_id, 0);
}

RngStream gate_stream(std::uint64_t master_seed, std::uint64_t gate_index,
                      StreamPurpose purpose) noexcept {
  const std::uint64_t id = (static_cast<std::uint64_t>(purpose) << 56) |
                           (gate_index & ((std::uint64_t{1} << 56) - 1));
  return derive_stream(master_seed, id);
}

}  // namespace apd
