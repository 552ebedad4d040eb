// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "apd/error.hpp"
#include "apd/sampling.hpp"

namespace apd {

void SourceParams::validate() const {
  if (!(mu_detected >= 0.0) || !std::isfinite(mu_detected)) {
    throw ConfigError("source.mu_detected", "must be a finite nonnegative number");
  }
  if (!(spot_fwhm > 0.0)) throw ConfigError("source.spot_fwhm", "must be positive");
  if (!(arrival_jitter_sigma >= 0.0)) {
    throw ConfigError("source.arrival_jitter_sigma", "must be nonnegative");
  }
}

std::uint32_t sample_detected_photons(double mu, RngStream& rng) {
  if (!(mu >= 0.0)) throw ConfigError("source.mu_detected", "must be nonnegative");
  return draw_poisson(mu, rng);
}

std::vector<Point> sample_seed_positions(std::size_t n, const SourceParams& source,
                                         RngStream& rng) {
  std::vector<Point> out;
  out.reserve(n);
  const double sigma = source.sigma();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw_normal(source.spot_center.x, sigma, rng);
    const double y = draw_normal(source.spot_center.y, sigma, rng);
    out.push_back({x, y});
  }
  return out;
}

GateSeeds sample_gate_seeds(const SourceParams& source, std::uint64_t master_seed,
                            std::uint64_t gate_index) {
  auto photon_rng = gate_stream(master_seed, gate_index, StreamPurpose::photons);
  const std::uint32_t n = sample_detected_photons(source.mu_detected, photon_rng);
  GateSeeds seeds;
  if (n == 0) return seeds;
  auto position_rng = gate_stream(master_seed, gate_index, StreamPurpose::positions);
  seeds.positions = sample_seed_positions(n, source, position_rng);
  seeds.arrival_times.assign(n, source.arrival_time);
  if (source.arrival_jitter_sigma > 0.0) {
    auto jitter_rng = gate_stream(master_seed, gate_index, StreamPurpose::jitter);
    for (auto& t : seeds.arrival_times) {
      t = draw_normal(t, source.arrival_jitter_sigma * 1e-3, jitter_rng);
    }
  }
  return seeds;
}

double knife_edge_response(double scan_x, double edge_x, const SourceParams& source) {
  const double z = (scan_x - edge_x) / source.sigma();
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace {

// Fraction of a circle of radius r, centred a distance d from the origin,
// lying inside the disk of radius big_r centred at the origin.
double arc_fraction_inside(double r, double d, double big_r) {
  if (r <= 0.0) return d < big_r ? 1.0 : 0.0;
  if (d + r <= big_r) return 1.0;
  if (r >= d + big_r || d >= big_r + r) return 0.0;
  const double c = (d * d + r * r - big_r * big_r) / (2.0 * d * r);
  return std::acos(std::clamp(c, -1.0, 1.0)) / std::numbers::pi;
}

}  // namespace

std::vector<double> scan_photocurrent_image(std::span<const Point> grid, double active_diameter,
                                            const SourceParams& source) {
  if (grid.empty()) throw ConfigError("grid", "scan grid is empty");
  const double sigma = source.sigma();
  const double big_r = 0.5 * active_diameter;
  // Integrate the Rayleigh-distributed radial offset of the spot power
  // against the fraction of each ring that lands inside the active disk.
  constexpr int kRings = 600;
  const double r_max = 9.0 * sigma;
  const double h = r_max / kRings;
  std::vector<double> out;
  out.reserve(grid.size());
  for (const Point& p : grid) {
    const double d = std::hypot(p.x, p.y);
    double acc = 0.0;
    for (int i = 0; i < kRings; ++i) {
      const double r = (i + 0.5) * h;
      const double density = r / (sigma * sigma) * std::exp(-0.5 * r * r / (sigma * sigma));
      acc += density * arc_fraction_inside(r, d, big_r);
    }
    out.push_back(std::clamp(acc * h, 0.0, 1.0));
  }
  return out;
}

}  // namespace apd
