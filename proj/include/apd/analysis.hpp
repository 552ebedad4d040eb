// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apd/acquisition.hpp"
#include "apd/optics.hpp"

namespace apd {

// ---------------------------------------------------------------------------
// Time-current histograms

struct CurrentBins {
  double lo = -0.5;  // mA
  double hi = 5.0;   // mA
  std::size_t count = 200;

  std::vector<double> edges() const;
};

/// Distribution of per-gate currents at one delay. Currents outside the bin
/// range are counted in the first or last bin so every gate is counted once.
struct TimeSliceHistogram {
  double t = 0.0;  // ns
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t n_gates = 0;
};

/// Per-gate current at delay t (nearest sample).
std::vector<double> slice_samples(const TraceBundle& bundle, double t);

std::vector<TimeSliceHistogram> histogram2d(const TraceBundle& bundle, std::span<const double> times,
                                            const CurrentBins& bins);

// ---------------------------------------------------------------------------
// Photon-number mixture

struct MixtureComponent {
  double weight = 0.0;
  double mean = 0.0;   // mA
  double sigma = 0.0;  // mA
};

/// Gaussian mixture indexed by photon number k = 0 .. k_max.
struct MixtureFit {
  std::vector<MixtureComponent> components;
  double log_likelihood = 0.0;  // per sample
  std::size_t n_samples = 0;
  int iterations = 0;

  int k_max() const noexcept { return static_cast<int>(components.size()) - 1; }
};

enum class MixtureWeights {
  poisson,  // w_k = Poisson(k; flux), last component takes the tail P(K >= k_max)
  free,     // unconstrained weights; number of occupied components chosen by BIC
};

std::string to_string(MixtureWeights weights);
MixtureWeights mixture_weights_from_string(const std::string& name);

struct MixtureOptions {
  MixtureWeights weights = MixtureWeights::poisson;
  int max_iterations = 5000;
  double tolerance = 1e-10;   // change of per-sample log-likelihood
  std::size_t max_bins = 4096;  // larger inputs are fitted on a fine histogram
};

/// Fits a photon-number Gaussian mixture by expectation maximization.
///
/// Component 0 is pinned at zero mean (electrical noise); every sigma is
/// floored at the electrical noise. Components k >= 1 start from a ladder
/// k * m1 for several guesses m1 of the one-photon current and the run with
/// the highest likelihood is kept. With Poisson weights the single flux
/// parameter replaces the free weights in the M-step. With free weights the
/// number of occupied photon components is chosen by BIC; unused components
/// up to k_max get zero weight and sit on the ladder above the last fitted
/// mean. Inputs larger than max_bins are binned on
/// a fine grid first (binning width << electrical noise). Throws
/// InsufficientSamples for fewer than 50 samples and ConvergenceError if no
/// start converges.
MixtureFit fit_mixture(std::span<const double> samples, int k_max, const NoiseParams& noise,
                       const MixtureOptions& options = {});

/// Photon number with the largest posterior weight * density; ties go to
/// the smaller k.
int classify_photon_number(double current, const MixtureFit& fit);

// ---------------------------------------------------------------------------
// Time-dependent noise factor

enum class BandSelection {
  by_fit,        // mixture classifier assigns band 1
  by_threshold,  // low-flux rule: every sample above threshold_sigmas * sigma
  by_truth,      // manifest ground truth: gates with exactly one photon
};

std::string to_string(BandSelection selection);
BandSelection band_selection_from_string(const std::string& name);

struct NoiseFactorOptions {
  NoiseParams noise{};
  int k_max = 4;
  std::size_t min_samples = 100;
  double threshold_sigmas = 5.0;
};

struct RatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// <x^2> / <x>^2 with a delete-one jackknife standard error.
RatioEstimate noise_factor_estimate(std::span<const double> samples);

struct NoiseFactorSeries {
  std::vector<double> times;       // ns
  std::vector<double> values;
  std::vector<double> std_errors;
  std::vector<std::size_t> counts;  // selected 1-photon samples
  std::vector<double> omitted;     // requested times without enough samples
};

NoiseFactorSeries noise_factor_series(const TraceBundle& bundle, std::span<const double> times,
                                      BandSelection selection,
                                      const NoiseFactorOptions& options = {});

// ---------------------------------------------------------------------------
// Resolution metrics

/// Point between the means of a and b where their (unweighted) densities cross.
double decision_boundary(const MixtureComponent& a, const MixtureComponent& b);

/// Mean of the two tail masses beyond the decision boundary of a and b.
double pairwise_misclassification(const MixtureComponent& a, const MixtureComponent& b);

/// Poisson mean maximizing sum_k w_k log P(k), the last weight taken as the
/// tail P(K >= k_max).
double fit_poisson_flux(std::span<const double> weights);

struct ResolutionReport {
  std::vector<double> separations;        // mean(k+1) - mean(k)
  std::vector<double> widths_fwhm;        // per component
  std::vector<double> misclassification;  // per adjacent pair (k, k+1)
  double flux_estimate = 0.0;
};

ResolutionReport resolution_report(const MixtureFit& fit);

// ---------------------------------------------------------------------------
// Knife-edge spot size

struct ScanPoint {
  double x = 0.0;      // um
  double value = 0.0;  // photocurrent, any units
};

struct SpotEstimate {
  double fwhm = 0.0;              // um
  double center = 0.0;            // um, edge position
  double resolution_floor = 0.0;  // um, twice the scan step
};

/// Differentiates an edge scan, fits a Gaussian to the derivative and
/// returns its FWHM (corrected for the central-difference smoothing).
/// Throws InvalidScan for fewer than 20 points, a flat scan, or a scan that
/// is non-monotonic beyond 5% of its range.
SpotEstimate estimate_spot_diameter(std::span<const ScanPoint> scan);

}  // namespace apd
