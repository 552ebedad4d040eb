// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/sampling.hpp"

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace apd {

std::uint64_t draw_binomial(std::uint64_t trials, double p, RngStream& rng) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  boost::random::binomial_distribution<std::int64_t, double> dist(
      static_cast<std::int64_t>(trials), p);
  return static_cast<std::uint64_t>(dist(rng));
}

std::uint32_t draw_poisson(double mean, RngStream& rng) {
  if (mean <= 0.0) return 0;
  boost::random::poisson_distribution<std::uint32_t, double> dist(mean);
  return dist(rng);
}

double draw_normal(double mean, double sigma, RngStream& rng) {
  if (sigma <= 0.0) return mean;
  boost::random::normal_distribution<double> dist(mean, sigma);
  return dist(rng);
}

}  // namespace apd
