// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "apd/rng.hpp"

namespace apd {

// Thin wrappers over Boost.Random distributions. Boost's algorithms are
// implemented in headers, so the same engine output gives the same variates
// on every platform (unlike the std:: distributions).

std::uint64_t draw_binomial(std::uint64_t trials, double p, RngStream& rng);
std::uint32_t draw_poisson(double mean, RngStream& rng);
double draw_normal(double mean, double sigma, RngStream& rng);

}  // namespace apd
