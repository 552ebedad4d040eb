// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apd/rng.hpp"

namespace apd {

struct Point {
  double x = 0.0;  // um
  double y = 0.0;  // um
};

/// FWHM of a Gaussian divided by its standard deviation, 2 sqrt(2 ln 2).
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

/// Attenuated pulsed laser focused onto the device.
struct SourceParams {
  double mu_detected = 0.05;         // mean detected photons per gate
  double spot_fwhm = 1.9;            // um
  Point spot_center{};               // um, device center is the origin
  double arrival_time = 1.0;         // ns after the gate opens
  double arrival_jitter_sigma = 0.0; // ps
  double wavelength = 1550.0;        // nm, metadata only

  void validate() const;
  double sigma() const noexcept { return spot_fwhm / kFwhmPerSigma; }
  double spot_radius() const noexcept { return 0.5 * spot_fwhm; }
};

/// Seed holes of one gate: one per detected photon.
struct GateSeeds {
  std::vector<Point> positions;
  std::vector<double> arrival_times;  // ns, gate time

  std::size_t n_photons() const noexcept { return arrival_times.size(); }
};

std::uint32_t sample_detected_photons(double mu, RngStream& rng);

std::vector<Point> sample_seed_positions(std::size_t n, const SourceParams& source,
                                         RngStream& rng);

/// Draws a complete GateSeeds record using the per-purpose streams of one gate.
GateSeeds sample_gate_seeds(const SourceParams& source, std::uint64_t master_seed,
                            std::uint64_t gate_index);

/// Normalized photocurrent of a Gaussian spot centred at scan_x over a
/// straight edge at edge_x (active side at larger x).
double knife_edge_response(double scan_x, double edge_x, const SourceParams& source);

/// Fraction of the Gaussian spot power landing inside a circular active area
/// of the given diameter centred at the origin, for each spot position.
std::vector<double> scan_photocurrent_image(std::span<const Point> grid, double active_diameter,
                                            const SourceParams& source);

}  // namespace apd
