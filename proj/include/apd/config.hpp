// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "apd/acquisition.hpp"
#include "apd/branching.hpp"
#include "apd/calibration.hpp"
#include "apd/device.hpp"
#include "apd/optics.hpp"

namespace apd {

/// Calibrated single-photon model. These are the values written by
/// `apdsim calibrate` for configs/measured_targets.yaml.
OffspringModel default_offspring_model();
DeviceParams default_device();

/// Everything that determines the bytes of a simulated bundle.
struct SimConfig {
  DeviceParams device = default_device();
  SourceParams source{};
  OffspringModel model = default_offspring_model();
  NoiseParams noise{};
  SaturationMode saturation = SaturationMode::global_feedback;
  std::uint64_t n_gates = 10000;
  std::uint64_t master_seed = 1;
  double dt = 0.01;  // ns
  /// Recorded delays relative to source.arrival_time, ns.
  std::pair<double, double> record_window{-0.1, 3.0};
  std::string output = "bundle";

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  /// Record window on the gate clock used by simulate_gate.
  RecordWindow gate_window() const noexcept;
};

std::string to_string(SaturationMode mode);
SaturationMode saturation_mode_from_string(const std::string& name);

nlohmann::json config_to_json(const SimConfig& config);
/// Strict: unknown keys and ill-typed values raise ConfigError naming the key.
/// Missing keys keep their defaults. Sections other than the simulation ones
/// (for example `analysis` or `scan`) are ignored.
SimConfig config_from_json(const nlohmann::json& j);

/// Reads a YAML document into JSON (mappings, sequences, typed scalars).
nlohmann::json load_yaml(const std::filesystem::path& path);
std::string to_yaml(const nlohmann::json& j);

SimConfig load_config(const std::filesystem::path& path);
void save_config(const SimConfig& config, const std::filesystem::path& path);

CalibrationTargets targets_from_json(const nlohmann::json& j);
/// Tolerance stored next to the targets (default 0.05).
double targets_tolerance(const nlohmann::json& j);

}  // namespace apd
