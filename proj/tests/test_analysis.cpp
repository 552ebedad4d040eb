// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "apd/analysis.hpp"
#include "apd/config.hpp"
#include "apd/error.hpp"
#include "apd/optics.hpp"
#include "apd/sampling.hpp"
#include "apd/simulation.hpp"

using namespace apd;

namespace {

double normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::vector<double> draw_mixture(const std::vector<MixtureComponent>& comps, std::size_t n,
                                 std::uint64_t seed) {
  RngStream rng(seed, 0);
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < comps.size() && u >= comps[k].weight) u -= comps[k++].weight;
    out.push_back(draw_normal(comps[k].mean, comps[k].sigma, rng));
  }
  return out;
}

// Bundle of constant traces, one per gate, with the given photon counts.
TraceBundle constant_bundle(const std::vector<double>& levels, const std::vector<std::uint32_t>& photons,
                            double sigma, std::uint64_t seed) {
  RngStream rng(seed, 0);
  TraceBundle b;
  b.manifest.gate_count = levels.size();
  b.manifest.photon_counts = photons;
  for (double level : levels) {
    Trace tr{0.0, 0.01, {}};
    for (int i = 0; i < 60; ++i) {
      tr.samples.push_back(static_cast<float>(level + (sigma > 0.0 ? draw_normal(0.0, sigma, rng) : 0.0)));
    }
    b.traces.push_back(std::move(tr));
  }
  return b;
}

std::vector<ScanPoint> synthetic_edge(double fwhm, double step, double half_width) {
  SourceParams source;
  source.spot_fwhm = fwhm;
  std::vector<ScanPoint> scan;
  for (double x = -half_width; x <= half_width + 1e-9; x += step) scan.push_back({x, knife_edge_response(x, 0.0, source)});
  return scan;
}

}  // namespace

TEST_CASE("time-slice histograms conserve gates") {
  const TraceBundle one = constant_bundle({0.7}, {1}, 0.0, 1);
  const std::vector<double> times = {0.0, 0.1, 0.3, 0.59};
  for (const auto& h : histogram2d(one, times, CurrentBins{-0.5, 5.0, 55})) {
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == 1);
    CHECK(h.n_gates == 1);
  }
  // out-of-range currents land in the edge bins
  const TraceBundle wide = constant_bundle({-3.0, 0.0, 40.0}, {0, 0, 5}, 0.0, 1);
  const auto h = histogram2d(wide, times, CurrentBins{-0.5, 5.0, 11}).front();
  CHECK(h.counts.front() == 1);
  CHECK(h.counts.back() == 1);
  CHECK(h.edges.size() == 12);
  CHECK_THROWS_AS(histogram2d(TraceBundle{}, times, CurrentBins{}), InsufficientSamples);
}

TEST_CASE("zero-flux bundle puts all mass near zero") {
  SimConfig cfg;
  cfg.source.mu_detected = 0.0;
  cfg.n_gates = 2000;
  cfg.record_window = {-0.1, 0.5};
  const TraceBundle b = run_simulation(cfg, 1);
  const std::vector<double> times = {0.0, 0.2, 0.4};
  for (const auto& h : histogram2d(b, times, CurrentBins{-0.5, 5.0, 110})) {
    std::uint64_t near_zero = 0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      if (h.edges[i] >= -0.25 && h.edges[i + 1] <= 0.25) near_zero += h.counts[i];
    }
    CHECK(near_zero == 2000);
  }
}

TEST_CASE("mixture fit recovers a free-weight three-component mixture") {
  const double raw[] = {0.118, 0.252, 0.269};
  const double total = raw[0] + raw[1] + raw[2];
  const std::vector<MixtureComponent> truth = {
      {raw[0] / total, 0.0, 0.0425}, {raw[1] / total, 0.9, 0.18}, {raw[2] / total, 1.8, 0.25}};
  const auto samples = draw_mixture(truth, 40000, 3);
  MixtureOptions opt;
  opt.weights = MixtureWeights::free;
  const MixtureFit fit = fit_mixture(samples, 2, NoiseParams{}, opt);
  REQUIRE(fit.components.size() == 3);
  CHECK(fit.components[0].mean == 0.0);
  for (int k = 1; k <= 2; ++k) CHECK(fit.components[k].mean == doctest::Approx(truth[k].mean).epsilon(0.10));
  for (int k = 0; k <= 2; ++k) CHECK(fit.components[k].weight == doctest::Approx(truth[k].weight).epsilon(0.20));
  for (int k = 1; k <= 2; ++k) CHECK(fit.components[k].sigma == doctest::Approx(truth[k].sigma).epsilon(0.20));
}

TEST_CASE("mixture fit with Poisson weights recovers the flux") {
  std::vector<MixtureComponent> truth;
  for (int k = 0; k <= 7; ++k) {
    const double w = std::exp(-2.14) * std::pow(2.14, k) / std::tgamma(k + 1.0);
    truth.push_back({w, 0.9 * k, std::sqrt(0.0425 * 0.0425 + k * 0.18 * 0.18)});
  }
  const auto samples = draw_mixture(truth, 60000, 4);
  const MixtureFit fit = fit_mixture(samples, 5, NoiseParams{});
  REQUIRE(fit.components.size() == 6);
  CHECK(fit.components[0].weight == doctest::Approx(0.118).epsilon(0.20));
  CHECK(fit.components[1].weight == doctest::Approx(0.252).epsilon(0.20));
  CHECK(fit.components[2].weight == doctest::Approx(0.269).epsilon(0.20));
  for (int k = 1; k <= 3; ++k) CHECK(fit.components[k].mean == doctest::Approx(0.9 * k).epsilon(0.10));
  CHECK(resolution_report(fit).flux_estimate == doctest::Approx(2.14).epsilon(0.1 / 2.14));
}

TEST_CASE("mixture fit is scale equivariant") {
  const std::vector<MixtureComponent> truth = {{0.4, 0.0, 0.0425}, {0.35, 0.9, 0.15}, {0.25, 1.8, 0.2}};
  const auto samples = draw_mixture(truth, 20000, 5);
  const double c = 2.5;
  std::vector<double> scaled(samples);
  for (double& v : scaled) v *= c;
  for (MixtureWeights mode : {MixtureWeights::poisson, MixtureWeights::free}) {
    MixtureOptions opt;
    opt.weights = mode;
    const MixtureFit a = fit_mixture(samples, 3, NoiseParams{0.0425}, opt);
    const MixtureFit b = fit_mixture(scaled, 3, NoiseParams{0.0425 * c}, opt);
    for (int k = 1; k <= 2; ++k) CHECK(b.components[k].mean == doctest::Approx(c * a.components[k].mean).epsilon(0.01));
    int disagreements = 0;
    for (std::size_t i = 0; i < samples.size(); i += 7) {
      disagreements += classify_photon_number(samples[i], a) != classify_photon_number(scaled[i], b);
    }
    CHECK(disagreements <= 3);
  }
}

TEST_CASE("mixture fit of pure noise keeps the zero component") {
  const auto samples = draw_mixture({{1.0, 0.0, 0.0425}}, 5000, 6);
  for (MixtureWeights mode : {MixtureWeights::poisson, MixtureWeights::free}) {
    MixtureOptions opt;
    opt.weights = mode;
    const MixtureFit fit = fit_mixture(samples, 3, NoiseParams{}, opt);
    CHECK(fit.components[0].weight > 0.99);
    for (int k = 1; k <= 3; ++k) CHECK(fit.components[k].weight < 0.01);
  }
}

TEST_CASE("mixture fit input validation") {
  const std::vector<double> few(10, 0.0);
  CHECK_THROWS_AS(fit_mixture(few, 3, NoiseParams{}), InsufficientSamples);
  const std::vector<double> many(100, 0.0);
  CHECK_THROWS_AS(fit_mixture(many, 0, NoiseParams{}), ConfigError);
  CHECK_THROWS_AS(fit_mixture(many, 7, NoiseParams{}), ConfigError);
  CHECK(mixture_weights_from_string("free") == MixtureWeights::free);
  CHECK_THROWS_AS(mixture_weights_from_string("loose"), ConfigError);
  CHECK(band_selection_from_string(to_string(BandSelection::by_truth)) == BandSelection::by_truth);
}

TEST_CASE("photon-number classification") {
  MixtureFit fit;
  fit.components = {{0.5, 0.0, 0.0425}, {0.25, 0.9, 0.2}, {0.25, 1.8, 0.2}};
  CHECK(classify_photon_number(0.0, fit) == 0);
  CHECK(classify_photon_number(0.9, fit) == 1);
  CHECK(classify_photon_number(1.35, fit) == 1);
  CHECK(classify_photon_number(1.36, fit) == 2);
  CHECK(classify_photon_number(5.0, fit) == 2);
}

TEST_CASE("noise factor estimator") {
  std::vector<double> equal(1000, 0.3);
  CHECK(noise_factor_estimate(equal).value == doctest::Approx(1.0));
  CHECK(noise_factor_estimate(equal).std_error < 1e-6);
  const std::vector<double> two = {1.0, 3.0};
  CHECK(noise_factor_estimate(two).value == doctest::Approx(1.25));
  CHECK_THROWS_AS(noise_factor_estimate(std::vector<double>{1.0}), UndefinedStatistic);
  CHECK_THROWS_AS(noise_factor_estimate(std::vector<double>{-1.0, 0.5}), UndefinedStatistic);

  // exponential draws have <x^2>/<x>^2 = 2; the jackknife error covers the spread
  RngStream rng(7, 0);
  std::vector<double> expo;
  for (int i = 0; i < 200000; ++i) expo.push_back(-std::log(1.0 - rng.uniform()));
  const RatioEstimate est = noise_factor_estimate(expo);
  CHECK(std::abs(est.value - 2.0) < 4.0 * est.std_error);
  CHECK(est.std_error < 0.02);
}

TEST_CASE("noise factor series on constructed bundles") {
  const std::vector<double> times = {0.05, 0.2, 0.4};
  SUBCASE("noiseless constant currents give exactly one") {
    const TraceBundle b = constant_bundle(std::vector<double>(500, 0.19), std::vector<std::uint32_t>(500, 1), 0.0, 8);
    for (BandSelection sel : {BandSelection::by_truth, BandSelection::by_threshold}) {
      const auto series = noise_factor_series(b, times, sel, NoiseFactorOptions{NoiseParams{0.0}});
      REQUIRE(series.values.size() == 3);
      for (double v : series.values) CHECK(v == doctest::Approx(1.0));
    }
  }
  SUBCASE("electrical noise alone adds sigma^2 / m^2") {
    const std::size_t n = 40000;
    const TraceBundle b = constant_bundle(std::vector<double>(n, 0.19), std::vector<std::uint32_t>(n, 1), 0.0425, 9);
    const auto series = noise_factor_series(b, times, BandSelection::by_truth);
    REQUIRE(series.values.size() == 3);
    const double expected = 1.0 + 0.0425 * 0.0425 / (0.19 * 0.19);
    CHECK(expected == doctest::Approx(1.050).epsilon(0.001));
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(series.values[i] - expected) < 4.0 * series.std_errors[i]);
  }
  SUBCASE("ground truth selection uses only one-photon gates") {
    std::vector<double> levels;
    std::vector<std::uint32_t> photons;
    for (int i = 0; i < 300; ++i) {
      levels.push_back(i % 3 == 0 ? 0.5 : 2.0);
      photons.push_back(i % 3 == 0 ? 1 : 2);
    }
    const auto series = noise_factor_series(constant_bundle(levels, photons, 0.0, 10), times, BandSelection::by_truth);
    REQUIRE(series.counts.size() == 3);
    CHECK(series.counts[0] == 100);
    CHECK(series.values[0] == doctest::Approx(1.0));
  }
  SUBCASE("too few samples are reported as omitted") {
    const TraceBundle b = constant_bundle(std::vector<double>(20, 0.5), std::vector<std::uint32_t>(20, 1), 0.0, 11);
    const auto series = noise_factor_series(b, times, BandSelection::by_truth);
    CHECK(series.values.empty());
    CHECK(series.omitted.size() == 3);
  }
}

TEST_CASE("band selections agree on a simulated low-flux bundle") {
  SimConfig cfg;
  cfg.source.mu_detected = 0.05;
  cfg.n_gates = 60000;
  cfg.master_seed = 12;
  cfg.record_window = {-0.1, 0.45};
  const TraceBundle b = run_simulation(cfg, 1);
  const std::vector<double> times = {0.34};
  const auto truth = noise_factor_series(b, times, BandSelection::by_truth);
  const auto thr = noise_factor_series(b, times, BandSelection::by_threshold);
  const auto fit = noise_factor_series(b, times, BandSelection::by_fit);
  REQUIRE(truth.values.size() == 1);
  REQUIRE(thr.values.size() == 1);
  REQUIRE(fit.values.size() == 1);
  // by_fit agrees within the combined standard errors
  const double combined = std::hypot(truth.std_errors[0], fit.std_errors[0]);
  CHECK(std::abs(fit.values[0] - truth.values[0]) < 3.0 * combined);
  // the threshold rule keeps the 2-photon gates, which can only raise the ratio
  CHECK(thr.values[0] > truth.values[0]);
  CHECK(thr.values[0] < truth.values[0] * 1.03);
  CHECK(trigger_fraction(b) == doctest::Approx(1.0 - std::exp(-0.05)).epsilon(0.1));
}

TEST_CASE("decision boundary and misclassification") {
  const MixtureComponent a{0.5, 0.9, 0.18}, b{0.5, 1.8, 0.18};
  CHECK(decision_boundary(a, b) == doctest::Approx(1.35));
  CHECK(pairwise_misclassification(a, b) == doctest::Approx(normal_tail(0.45 / 0.18)));
  CHECK(pairwise_misclassification(a, b) == doctest::Approx(0.0062).epsilon(0.02));
  CHECK(pairwise_misclassification(a, a) == doctest::Approx(0.5));
  // unequal widths: the crossing moves toward the narrower component
  const MixtureComponent narrow{0.5, 0.0, 0.05}, wide{0.5, 1.0, 0.3};
  const double x = decision_boundary(narrow, wide);
  CHECK(x > 0.0);
  CHECK(x < 0.5);
  const double pa = std::exp(-0.5 * x * x / (0.05 * 0.05)) / 0.05;
  const double pb = std::exp(-0.5 * (x - 1.0) * (x - 1.0) / (0.3 * 0.3)) / 0.3;
  CHECK(pa == doctest::Approx(pb).epsilon(1e-6));
}

TEST_CASE("Poisson flux from component weights") {
  std::vector<double> w;
  double tail = 1.0;
  for (int k = 0; k < 5; ++k) {
    const double p = std::exp(-2.14) * std::pow(2.14, k) / std::tgamma(k + 1.0);
    w.push_back(p);
    tail -= p;
  }
  w.push_back(tail);
  CHECK(fit_poisson_flux(w) == doctest::Approx(2.14).epsilon(1e-4));
  // unnormalized weights give the same answer
  for (double& v : w) v *= 3.0;
  CHECK(fit_poisson_flux(w) == doctest::Approx(2.14).epsilon(1e-4));
  CHECK_THROWS_AS(fit_poisson_flux(std::vector<double>{1.0}), UndefinedStatistic);
}

TEST_CASE("resolution report") {
  MixtureFit fit;
  fit.components = {{0.3, 0.0, 0.0425}, {0.4, 0.9, 0.18}, {0.3, 1.8, 0.25}};
  const auto r = resolution_report(fit);
  REQUIRE(r.separations.size() == 2);
  CHECK(r.separations[0] == doctest::Approx(0.9));
  CHECK(r.widths_fwhm[1] == doctest::Approx(0.18 * kFwhmPerSigma));
  CHECK(r.misclassification.size() == 2);
  CHECK(r.misclassification[0] < r.misclassification[1]);
}

TEST_CASE("spot diameter from a knife-edge scan") {
  for (double fwhm : {1.9, 3.8, 5.0}) {
    CAPTURE(fwhm);
    const auto est = estimate_spot_diameter(synthetic_edge(fwhm, 0.1, 6.0 + fwhm));
    CHECK(est.fwhm == doctest::Approx(fwhm).epsilon(0.05));
    CHECK(std::abs(est.center) < 0.05);
  }
  // decreasing scans are handled too
  auto falling = synthetic_edge(1.9, 0.1, 6.0);
  for (auto& p : falling) p.x = -p.x;
  CHECK(estimate_spot_diameter(falling).fwhm == doctest::Approx(1.9).epsilon(0.05));

  std::vector<ScanPoint> step;
  for (int i = -50; i <= 50; ++i) step.push_back({0.1 * i, i > 0 ? 1.0 : 0.0});
  const auto floor = estimate_spot_diameter(step);
  CHECK(floor.fwhm <= 2.0 * 0.1 + 1e-9);
  CHECK(floor.resolution_floor == doctest::Approx(0.2));
}

TEST_CASE("invalid edge scans") {
  CHECK_THROWS_AS(estimate_spot_diameter(synthetic_edge(1.9, 1.0, 5.0)), InvalidScan);
  std::vector<ScanPoint> flat;
  for (int i = 0; i < 40; ++i) flat.push_back({0.1 * i, 0.0});
  CHECK_THROWS_AS(estimate_spot_diameter(flat), InvalidScan);
  std::vector<ScanPoint> bumpy;
  for (int i = 0; i < 40; ++i) bumpy.push_back({0.1 * i, (i % 2) ? 1.0 : 0.0});
  CHECK_THROWS_AS(estimate_spot_diameter(bumpy), InvalidScan);
}
