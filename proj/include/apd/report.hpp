// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apd/analysis.hpp"
#include "apd/config.hpp"

namespace apd {

/// What `apdsim analyze` should produce. Read from the `analysis` table of a
/// config file; an empty table yields only the manifest echo.
struct AnalysisSpec {
  /// Any of: hist2d, slices, noise_factor, mixture, resolution, mean_trace.
  std::set<std::string> outputs;
  std::vector<double> times;        // ns, for hist2d and noise_factor
  std::vector<double> slice_times;  // ns, for slices, mixture and resolution
  CurrentBins bins{};
  std::optional<BandSelection> selection;  // empty: by_threshold below mu 0.5, else by_fit
  int k_max = 4;
  MixtureWeights weights = MixtureWeights::poisson;
};

AnalysisSpec analysis_spec_from_json(const nlohmann::json& j);

/// Writes the requested CSV files (and SVG figures when `figures` is set)
/// into out_dir and returns the JSON report, which is also written as
/// out_dir/report.json. Statistics that cannot be formed are skipped with a
/// warning in the report.
nlohmann::json analyze_bundle(const TraceBundle& bundle, const AnalysisSpec& spec,
                              const std::filesystem::path& out_dir, bool figures);

struct ScanSpec {
  double image_half_width = 35.0;  // um
  double image_step = 1.0;         // um
  Point image_center{};            // um
  double edge_center = 25.0;       // um along x; default is the device edge
  double edge_half_width = 6.0;    // um
  double edge_step = 0.1;          // um
};

ScanSpec scan_spec_from_json(const nlohmann::json& j);

/// Scanning-photocurrent image and knife-edge scan with the spot estimate.
nlohmann::json run_scan(const SimConfig& config, const ScanSpec& spec,
                        const std::filesystem::path& out_dir, bool figures);

/// Edge scan along x at y = 0 through the device boundary.
std::vector<ScanPoint> edge_scan(const SimConfig& config, const ScanSpec& spec);

std::string format_number(double v);

}  // namespace apd
