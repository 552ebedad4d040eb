// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apd/acquisition.hpp"
#include "apd/branching.hpp"
#include "apd/device.hpp"

namespace apd {

/// Mean 1-photon current at a delay after photon arrival.
struct GrowthAnchor {
  double t = 0.0;        // ns
  double current = 0.0;  // mA
};

/// Full width at half maximum of the 1-photon current distribution at a
/// delay, taken as 2 sqrt(2 ln 2) times its standard deviation.
struct WidthTarget {
  double t = 0.0;     // ns
  double fwhm = 0.0;  // mA
};

struct CalibrationTargets {
  std::vector<GrowthAnchor> anchors;
  double plateau = 1.07;
  std::optional<WidthTarget> width;
  /// Delay window averaged for the plateau; defaults to the anchor span.
  std::optional<std::pair<double, double>> plateau_window;
  /// When set, the plateau includes the electrical-noise term sigma^2 / <I>^2.
  std::optional<NoiseParams> noise;

  /// Throws ConfigError for fewer than two anchors, nonpositive or unordered
  /// anchors, a plateau below 1, or a nonpositive width.
  void validate() const;
};

struct CalibrationOptions {
  int min_dead_steps = 0;
  int max_dead_steps = 40;
  std::size_t n_gates = 20000;  // Monte Carlo gates per candidate
  std::uint64_t seed = 0x5eed;
  double dt = 0.01;              // ns
  double arrival_time = 1.0;     // ns, gate time of the seed
};

/// Moments of the noiseless current of n-seed avalanches on the delay grid
/// k * dt, k = 0 .. floor(t_end / dt).
struct EnsembleMoments {
  std::vector<double> times;  // ns after arrival
  std::vector<double> mean;   // mA
  std::vector<double> second; // mA^2
  std::size_t n_gates = 0;

  /// <I^2> / <I>^2 at index k, optionally with electrical noise added.
  double noise_factor(std::size_t k, double sigma_electrical = 0.0) const;
  std::size_t index_at(double t) const;
};

/// All seeds arrive together at the centre of the spot.
EnsembleMoments simulate_ensemble(int n_seeds, const DeviceParams& device,
                                  const OffspringModel& model, std::size_t n_gates,
                                  std::uint64_t seed, double dt, double t_end,
                                  double arrival_time = 1.0);

struct CalibrationCandidate {
  OffspringModel model;
  double current_per_carrier_scale = 0.0;
  std::vector<double> anchor_currents;  // simulated, mA
  std::vector<double> residuals;        // relative, per anchor
  double plateau = 0.0;
  double plateau_residual = 0.0;        // relative
  double width = 0.0;                   // mA, when a width target is set
  double width_residual = 0.0;          // relative
  bool feasible = false;
};

struct CalibrationResult {
  CalibrationCandidate best;
  std::vector<CalibrationCandidate> candidates;  // one per dead-step count tried
};

/// Fits a dead_space model and the current scale to growth anchors and a
/// plateau noise factor.
///
/// For each dead-step count the post-dead-space probability is bisected so
/// the mean-field growth ratio between the first and last anchor matches,
/// the current scale is the geometric-mean fit to all anchors, and the
/// plateau (and band width, if targeted) is measured by Monte Carlo. Among
/// candidates whose every relative residual is within tol, the one with the
/// smallest sum of squared plateau and width residuals wins.
/// Throws InfeasibleTargets (listing the closest candidate) when none is.
CalibrationResult calibrate_model(const CalibrationTargets& targets, const DeviceParams& device,
                                  double tol, const CalibrationOptions& options = {});

std::string describe(const CalibrationCandidate& candidate,
                     const CalibrationTargets& targets);

}  // namespace apd
