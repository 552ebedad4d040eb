// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/device.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "apd/error.hpp"

namespace apd {

double DeviceParams::active_area() const noexcept {
  const double r = 0.5 * active_diameter;
  return std::numbers::pi * r * r;
}

void DeviceParams::validate() const {
  if (!(v_dc < v_breakdown)) throw ConfigError("device.v_dc", "DC bias must stay below breakdown");
  if (!(v_dc + v_pulse > v_breakdown)) {
    throw ConfigError("device.v_pulse", "gate must raise the bias above breakdown");
  }
  if (!(gate_width > 0.0)) throw ConfigError("device.gate_width", "must be positive");
  if (!(rep_rate > 0.0)) throw ConfigError("device.rep_rate", "must be positive");
  if (!(r_series > 0.0)) throw ConfigError("device.r_series", "must be positive");
  if (!(r_feedback_total >= r_series)) {
    throw ConfigError("device.r_feedback_total", "must include the series sense resistor");
  }
  const double expected_sat = excess_bias() / r_feedback_total * 1000.0;
  if (!(std::abs(i_sat - expected_sat) <= 0.01 * expected_sat)) {
    throw ConfigError("device.i_sat", "must equal excess bias / r_feedback_total (" +
                                          std::to_string(expected_sat) + " mA)");
  }
  if (!(active_diameter > 0.0)) throw ConfigError("device.active_diameter", "must be positive");
  if (!(v_lateral >= 0.0)) throw ConfigError("device.v_lateral", "must be nonnegative");
  if (!(current_per_carrier_scale > 0.0)) {
    throw ConfigError("device.current_per_carrier_scale", "must be positive");
  }
}

double gate_waveform(double t, const DeviceParams& params) {
  const double period = params.repetition_period();
  double phase = std::fmod(t, period);
  if (phase < 0.0) phase += period;
  return params.v_dc + (phase < params.gate_width ? params.v_pulse : 0.0);
}

double effective_overvoltage(double t, double current, const DeviceParams& params) {
  const double v = gate_waveform(t, params) - params.v_breakdown -
                   current * params.r_feedback_total * 1e-3;
  return std::max(0.0, v);
}

double local_overvoltage(double t, double current, double filament_area,
                         const DeviceParams& params) {
  if (filament_area <= 0.0) return 0.0;
  const double area_ratio = params.active_area() / std::min(filament_area, params.active_area());
  const double v = gate_waveform(t, params) - params.v_breakdown -
                   current * params.r_feedback_total * 1e-3 * area_ratio;
  return std::max(0.0, v);
}

OffspringModel ionization_prob(double overvoltage, const OffspringModel& model,
                               double reference_overvoltage) {
  const double factor = std::max(0.0, overvoltage) / reference_overvoltage;
  OffspringModel out = model;
  out.p_ionize = std::clamp(model.p_ionize * factor, 0.0, 1.0);
  out.p_post = std::clamp(model.p_post * factor, 0.0, 1.0);
  return out;
}

double avalanche_area(double elapsed, const DeviceParams& params, double spot_radius) {
  const double r = spot_radius + params.v_lateral * std::max(0.0, elapsed);
  return std::min(std::numbers::pi * r * r, params.active_area());
}

double filament_union_area(std::span<const Point> centers, std::span<const double> radii,
                           const DeviceParams& params) {
  const double big_r = 0.5 * params.active_diameter;
  const double device_area = params.active_area();
  if (centers.empty()) return 0.0;
  double y_lo = big_r, y_hi = -big_r;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double d = std::hypot(centers[i].x, centers[i].y);
    if (radii[i] >= big_r + d) return device_area;
    y_lo = std::min(y_lo, centers[i].y - radii[i]);
    y_hi = std::max(y_hi, centers[i].y + radii[i]);
  }
  if (centers.size() == 1 && std::hypot(centers[0].x, centers[0].y) + radii[0] <= big_r) {
    return std::numbers::pi * radii[0] * radii[0];
  }
  y_lo = std::max(y_lo, -big_r);
  y_hi = std::min(y_hi, big_r);
  if (y_hi <= y_lo) return 0.0;

  constexpr int kSlices = 400;
  const double h = (y_hi - y_lo) / kSlices;
  std::vector<std::pair<double, double>> spans;
  spans.reserve(centers.size());
  double area = 0.0;
  for (int k = 0; k < kSlices; ++k) {
    const double y = y_lo + (k + 0.5) * h;
    const double chord = std::sqrt(std::max(0.0, big_r * big_r - y * y));
    spans.clear();
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double dy = y - centers[i].y;
      if (std::abs(dy) >= radii[i]) continue;
      const double w = std::sqrt(radii[i] * radii[i] - dy * dy);
      const double a = std::max(centers[i].x - w, -chord);
      const double b = std::min(centers[i].x + w, chord);
      if (b > a) spans.emplace_back(a, b);
    }
    std::sort(spans.begin(), spans.end());
    double covered = 0.0, cur_a = 0.0, cur_b = 0.0;
    bool open = false;
    for (const auto& [a, b] : spans) {
      if (!open || a > cur_b) {
        if (open) covered += cur_b - cur_a;
        cur_a = a;
        cur_b = b;
        open = true;
      } else {
        cur_b = std::max(cur_b, b);
      }
    }
    if (open) covered += cur_b - cur_a;
    area += covered * h;
  }
  return std::min(area, device_area);
}

double carriers_to_current(std::uint64_t total, const DeviceParams& params) {
  return static_cast<double>(total) * params.current_per_carrier_scale;
}

Trace simulate_gate(const GateSeeds& seeds, const DeviceParams& params,
                    const OffspringModel& model, RngStream& rng, double dt, RecordWindow window,
                    const GateOptions& options) {
  if (!(dt > 0.0)) throw ConfigError("dt", "time step must be positive");
  if (!(window.start >= 0.0 && window.end <= params.gate_width && window.end >= window.start)) {
    throw ConfigError("record_window", "record window must lie within the gate");
  }
  if (seeds.positions.size() != seeds.arrival_times.size()) {
    throw ConfigError("seeds", "positions and arrival times differ in length");
  }
  for (double t : seeds.arrival_times) {
    if (!(t >= 0.0 && t < params.gate_width)) {
      throw ConfigError("seeds.arrival_times", "seed arrives outside the gate");
    }
  }

  const auto n_samples =
      static_cast<std::size_t>(std::floor((window.end - window.start) / dt + 1e-9)) + 1;
  Trace trace{window.start, dt, std::vector<float>(n_samples, 0.0f)};
  if (seeds.arrival_times.empty()) {
    if (options.history) options.history->assign(n_samples, AvalancheState{});
    return trace;
  }

  // Grid index of each seed's injection; negative indices precede the window.
  std::vector<std::ptrdiff_t> inject_at(seeds.n_photons());
  std::ptrdiff_t first = 0;
  for (std::size_t i = 0; i < seeds.n_photons(); ++i) {
    inject_at[i] = static_cast<std::ptrdiff_t>(
        std::ceil((seeds.arrival_times[i] - window.start) / dt - 1e-9));
    first = std::min(first, inject_at[i]);
  }

  const bool local = options.mode == SaturationMode::local_density;
  const bool need_geometry = local || options.history != nullptr;
  const double reference = params.excess_bias();
  if (options.history) options.history->clear();

  AvalancheState state;
  state.population = PopulationState(model);
  std::vector<Point> active_centers;
  std::vector<double> active_arrivals;
  std::vector<double> radii;
  const auto last = static_cast<std::ptrdiff_t>(n_samples) - 1;

  for (std::ptrdiff_t j = first; j <= last; ++j) {
    const double t = window.start + static_cast<double>(j) * dt;
    for (std::size_t i = 0; i < seeds.n_photons(); ++i) {
      if (inject_at[i] != j) continue;
      state.population.inject(1);
      if (!state.trigger_time) state.trigger_time = seeds.arrival_times[i];
      active_centers.push_back(seeds.positions[i]);
      active_arrivals.push_back(seeds.arrival_times[i]);
    }
    state.current = carriers_to_current(state.population.total(), params);

    if (need_geometry && !active_centers.empty()) {
      radii.resize(active_centers.size());
      const double cap = 0.5 * params.active_diameter;
      for (std::size_t i = 0; i < radii.size(); ++i) {
        radii[i] = std::min(
            options.spot_radius + params.v_lateral * std::max(0.0, t - active_arrivals[i]),
            cap + std::hypot(active_centers[i].x, active_centers[i].y));
      }
      state.filament_radius = std::min(*std::max_element(radii.begin(), radii.end()), cap);
      state.filament_area = filament_union_area(active_centers, radii, params);
    }

    if (j >= 0) {
      trace.samples[static_cast<std::size_t>(j)] = static_cast<float>(state.current);
      if (options.history) options.history->push_back(state);
    }
    if (j == last || state.population.total() == 0) continue;

    const double ov = local ? local_overvoltage(t, state.current, state.filament_area, params)
                            : effective_overvoltage(t, state.current, params);
    state.population = step_population(state.population, ionization_prob(ov, model, reference), rng);
  }
  return trace;
}

}  // namespace apd
