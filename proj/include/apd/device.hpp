// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "apd/branching.hpp"
#include "apd/optics.hpp"
#include "apd/rng.hpp"
#include "apd/trace.hpp"

namespace apd {

/// Gated InGaAs APD and its bias circuit. Voltages in V, times in ns,
/// resistances in ohm, currents in mA, lengths in um.
struct DeviceParams {
  double v_breakdown = 47.6;
  double v_dc = 45.5;
  double v_pulse = 5.6;
  double gate_width = 7.5;
  double rep_rate = 24.0;            // kHz
  double r_series = 50.0;            // sense resistor, part of r_feedback_total
  double r_feedback_total = 140.0;
  double i_sat = 25.0;
  double active_diameter = 50.0;
  double v_lateral = 25.0;           // um/ns
  double temperature = -50.0;        // degC, informational
  double current_per_carrier_scale = 0.1;  // mA per carrier; set by calibration

  double excess_bias() const noexcept { return v_dc + v_pulse - v_breakdown; }
  double repetition_period() const noexcept { return 1.0e6 / rep_rate; }
  double active_area() const noexcept;

  /// Throws ConfigError naming the field when an invariant fails.
  void validate() const;
};

double gate_waveform(double t, const DeviceParams& params);

/// Overvoltage left after the bias circuit drops current * r_feedback_total.
double effective_overvoltage(double t, double current, const DeviceParams& params);

/// Overvoltage under local (filament) saturation: the feedback resistance
/// seen by the avalanche scales as device area / filament area, so the
/// current density cannot exceed i_sat / device area.
double local_overvoltage(double t, double current, double filament_area,
                         const DeviceParams& params);

/// Scales the model's ionization probabilities by overvoltage / reference.
OffspringModel ionization_prob(double overvoltage, const OffspringModel& model,
                               double reference_overvoltage = 3.5);

/// Area of a filament seeded by a spot of radius spot_radius after spreading
/// laterally for `elapsed` ns, capped at the active area.
double avalanche_area(double elapsed, const DeviceParams& params, double spot_radius = 0.95);

/// Area of the union of disks, clipped to the active area.
double filament_union_area(std::span<const Point> centers, std::span<const double> radii,
                           const DeviceParams& params);

double carriers_to_current(std::uint64_t total, const DeviceParams& params);

enum class SaturationMode { global_feedback, local_density };

struct RecordWindow {
  double start = 0.9;  // ns, gate time
  double end = 4.0;    // ns, gate time
};

struct AvalancheState {
  PopulationState population;
  double filament_radius = 0.0;  // um, largest filament
  double filament_area = 0.0;    // um^2, union of filaments
  std::optional<double> trigger_time;
  double current = 0.0;          // mA
};

struct GateOptions {
  SaturationMode mode = SaturationMode::global_feedback;
  double spot_radius = 0.95;  // um
  /// When set, receives the avalanche state at every recorded sample.
  std::vector<AvalancheState>* history = nullptr;
};

/// Simulates one gate and returns the noiseless current on the record grid
/// start + k * dt, k = 0 .. floor((end - start) / dt). Seeds are injected at
/// the first grid time at or after their arrival. Throws ConfigError for
/// seeds arriving outside the gate or a window outside the gate.
Trace simulate_gate(const GateSeeds& seeds, const DeviceParams& params,
                    const OffspringModel& model, RngStream& rng, double dt, RecordWindow window,
                    const GateOptions& options = {});

}  // namespace apd
