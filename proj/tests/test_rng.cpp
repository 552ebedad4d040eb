// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>
#include <thread>
#include <vector>

#include "apd/rng.hpp"
#include "apd/sampling.hpp"

using namespace apd;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using Block = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("identical seed and stream give identical draws") {
  RngStream a = derive_stream(42, 0), b = derive_stream(42, 0);
  for (int i = 0; i < 1000; ++i) REQUIRE(a() == b());
}

TEST_CASE("different stream ids give different sequences") {
  RngStream a = derive_stream(42, 0), b = derive_stream(42, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += a() == b();
  CHECK(equal == 0);
}

TEST_CASE("stream output does not depend on the thread that draws it") {
  std::vector<std::uint64_t> serial;
  RngStream s = derive_stream(42, 7);
  for (int i = 0; i < 256; ++i) serial.push_back(s());

  std::vector<std::vector<std::uint64_t>> parallel(8);
  std::vector<std::thread> pool;
  for (int w = 0; w < 8; ++w) {
    pool.emplace_back([&parallel, w] {
      RngStream r = derive_stream(42, 7);
      for (int i = 0; i < 256; ++i) parallel[w].push_back(r());
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& p : parallel) CHECK(p == serial);
}

TEST_CASE("constructing at a counter skips ahead exactly") {
  RngStream a(9, 3);
  for (int i = 0; i < 37; ++i) a();
  RngStream b(9, 3, 37);
  for (int i = 0; i < 100; ++i) REQUIRE(a() == b());
}

TEST_CASE("gate purposes draw from distinct streams") {
  std::set<std::uint64_t> first;
  for (auto p : {StreamPurpose::photons, StreamPurpose::positions, StreamPurpose::avalanche,
                 StreamPurpose::noise, StreamPurpose::jitter}) {
    RngStream s = gate_stream(1, 5, p);
    first.insert(s());
  }
  CHECK(first.size() == 5);
  RngStream g5 = gate_stream(1, 5, StreamPurpose::noise), g6 = gate_stream(1, 6, StreamPurpose::noise);
  CHECK(g5() != g6());
}

TEST_CASE("uniform draws lie in [0, 1) with the right mean and variance") {
  RngStream s(3, 0);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum_sq += u * u;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(0.5).epsilon(4.0 * std::sqrt(1.0 / 12.0 / n) / 0.5));
  CHECK(sum_sq / n - mean * mean == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("binomial draws: degenerate cases and moments") {
  RngStream s(4, 0);
  CHECK(draw_binomial(0, 0.3, s) == 0);
  CHECK(draw_binomial(1000, 0.0, s) == 0);
  CHECK(draw_binomial(1000, 1.0, s) == 1000);
  const double n = 1e6;
  const double x = static_cast<double>(draw_binomial(1000000, 0.5, s));
  CHECK(std::abs(x - 0.5 * n) <= 3.0 * std::sqrt(n * 0.25));
}

TEST_CASE("poisson and normal draws have the requested moments") {
  RngStream s(5, 0);
  const int n = 100000;
  double sp = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    sp += draw_poisson(2.14, s);
    const double z = draw_normal(1.0, 0.5, s);
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(sp / n - 2.14) < 4.0 * std::sqrt(2.14 / n));
  const double mean = sn / n;
  CHECK(std::abs(mean - 1.0) < 4.0 * 0.5 / std::sqrt(n));
  CHECK(std::sqrt(sn2 / n - mean * mean) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(draw_poisson(0.0, s) == 0);
}
