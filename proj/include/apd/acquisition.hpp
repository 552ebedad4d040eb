// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apd/error.hpp"
#include "apd/rng.hpp"
#include "apd/trace.hpp"

namespace apd {

/// Electrical noise of the readout. The default makes the half width at half
/// maximum of the zero-photon peak 0.05 mA: sigma = 0.05 / sqrt(2 ln 2).
struct NoiseParams {
  double sigma_electrical = 0.05 / 1.1774100225154747;  // mA

  void validate() const;
};

/// Adds i.i.d. zero-mean Gaussian noise to every sample.
Trace add_electrical_noise(Trace trace, const NoiseParams& noise, RngStream& rng);

inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

struct BundleManifest {
  int schema_version = kManifestSchemaVersion;
  nlohmann::json config = nlohmann::json::object();  // full configuration echo
  std::uint64_t master_seed = 0;
  std::string created_utc;
  std::string generator = "apdsim";
  std::uint64_t gate_count = 0;
  std::vector<std::uint32_t> photon_counts;  // ground truth, one per gate

  friend bool operator==(const BundleManifest&, const BundleManifest&) = default;
};

/// Simulation output: a manifest plus one trace per gate, ordered by gate
/// index. All traces share t0, dt and length.
struct TraceBundle {
  BundleManifest manifest;
  std::vector<Trace> traces;

  friend bool operator==(const TraceBundle&, const TraceBundle&) = default;
};

enum class BundleErrorKind { io, bad_magic, bad_version, truncated, count_mismatch, manifest };

class BundleError : public Error {
 public:
  BundleError(BundleErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  BundleErrorKind kind() const noexcept { return kind_; }

 private:
  BundleErrorKind kind_;
};

/// Writes `dir/manifest.json` and `dir/traces.bin`, creating dir if needed.
///
/// traces.bin layout (all little endian): "APDT", u32 version, u32 gate
/// count, u32 samples per trace, f64 dt [ns], f64 t0 [ns], then
/// gate count x samples f32 currents [mA], row-major by gate.
void write_bundle(const TraceBundle& bundle, const std::filesystem::path& dir);

TraceBundle read_bundle(const std::filesystem::path& dir);

nlohmann::json manifest_to_json(const BundleManifest& manifest);
BundleManifest manifest_from_json(const nlohmann::json& j);

/// Current UTC time as an ISO-8601 string.
std::string utc_timestamp();

}  // namespace apd
