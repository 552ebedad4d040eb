// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

// Operation-level examples whose expected values are measured device
// numbers rather than derived ones. Some are out of reach of the model; those
// fail here on purpose and are tracked in the acceptance report as well.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "apd/analysis.hpp"
#include "apd/config.hpp"
#include "apd/device.hpp"
#include "apd/report.hpp"
#include "apd/simulation.hpp"

using namespace apd;

namespace {

const TraceBundle& low_flux_bundle() {
  static const TraceBundle bundle = [] {
    SimConfig cfg;
    cfg.source.mu_detected = 0.05;
    cfg.n_gates = 200000;
    cfg.master_seed = 2024;
    cfg.record_window = {-0.1, 0.45};
    return run_simulation(cfg, 1);
  }();
  return bundle;
}

}  // namespace

TEST_CASE("single-seed trace: 80% of the saturation current at 1.5 ns, saturated by 2.5 ns") {
  const DeviceParams d = default_device();
  GateSeeds seeds;
  seeds.positions = {Point{}};
  seeds.arrival_times = {1.0};
  const int gates = 500;
  std::vector<double> mean;
  Trace shape;
  for (int g = 0; g < gates; ++g) {
    RngStream rng(31, static_cast<std::uint64_t>(g));
    shape = simulate_gate(seeds, d, default_offspring_model(), rng, 0.01, {0.9, 4.0});
    mean.resize(shape.samples.size(), 0.0);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += shape.samples[i] / gates;
  }
  double t80 = NAN;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (mean[i] >= 0.8 * d.i_sat) {
      t80 = shape.time(i) - 1.0;
      break;
    }
  }
  CAPTURE(t80);
  CHECK(t80 == doctest::Approx(1.5).epsilon(0.15));
  CHECK(mean[shape.index_at(3.5)] == doctest::Approx(d.i_sat).epsilon(0.05));
}

TEST_CASE("low-flux slice at 340 ps has two clusters with the Poisson trigger fraction") {
  const auto& b = low_flux_bundle();
  const std::vector<double> t = {0.34};
  const auto h = histogram2d(b, t, CurrentBins{-0.5, 3.0, 70}).front();
  std::uint64_t triggered = 0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.edges[i] >= 0.25) triggered += h.counts[i];
  }
  CHECK(static_cast<double>(triggered) / h.n_gates == doctest::Approx(0.049).epsilon(0.005 / 0.049));
}

TEST_CASE("single-photon noise factor: 1.07 at 340 ps, 1.10 to 1.20 at 50 ps") {
  const auto& b = low_flux_bundle();
  const std::vector<double> t = {0.05, 0.34};
  const auto series = noise_factor_series(b, t, BandSelection::by_truth);
  REQUIRE(series.values.size() == 2);
  CHECK(series.values[1] == doctest::Approx(1.07).epsilon(0.02 / 1.07));
  CHECK(series.values[0] >= 1.10);
  CHECK(series.values[0] <= 1.20);
}

TEST_CASE("threshold band selection biases the noise factor by less than 0.5%") {
  const auto& b = low_flux_bundle();
  std::vector<double> t;
  for (int i = 20; i <= 45; i += 5) t.push_back(0.01 * i);
  const auto truth = noise_factor_series(b, t, BandSelection::by_truth);
  const auto thr = noise_factor_series(b, t, BandSelection::by_threshold);
  REQUIRE(truth.values.size() == t.size());
  REQUIRE(thr.values.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CAPTURE(t[i]);
    CHECK(std::abs(thr.values[i] / truth.values[i] - 1.0) < 0.005);
  }
}

TEST_CASE("default scan estimates a 1.9 um spot") {
  const SimConfig cfg;
  const auto est = estimate_spot_diameter(edge_scan(cfg, ScanSpec{}));
  CHECK(est.fwhm == doctest::Approx(1.9).epsilon(0.05));
}
