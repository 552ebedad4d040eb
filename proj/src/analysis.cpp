// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

namespace apd {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

// ---------------------------------------------------------------------------
// Histograms

std::vector<double> CurrentBins::edges() const {
  if (count == 0 || !(hi > lo)) throw ConfigError("current_bins", "need hi > lo and count > 0");
  std::vector<double> e(count + 1);
  const double w = (hi - lo) / static_cast<double>(count);
  for (std::size_t i = 0; i <= count; ++i) e[i] = lo + w * static_cast<double>(i);
  e.back() = hi;
  return e;
}

std::vector<double> slice_samples(const TraceBundle& bundle, double t) {
  std::vector<double> out;
  out.reserve(bundle.traces.size());
  for (const auto& tr : bundle.traces) out.push_back(tr.value_at(t));
  return out;
}

std::vector<TimeSliceHistogram> histogram2d(const TraceBundle& bundle, std::span<const double> times,
                                            const CurrentBins& bins) {
  if (bundle.traces.empty()) throw InsufficientSamples("histogram of an empty bundle");
  const auto edges = bins.edges();
  const double w = (bins.hi - bins.lo) / static_cast<double>(bins.count);
  std::vector<TimeSliceHistogram> out;
  out.reserve(times.size());
  for (double t : times) {
    TimeSliceHistogram h{t, edges, std::vector<std::uint64_t>(bins.count, 0), 0};
    for (const auto& tr : bundle.traces) {
      const double v = tr.value_at(t);
      const double pos = std::floor((v - bins.lo) / w);
      std::size_t idx = 0;
      if (pos >= static_cast<double>(bins.count)) {
        idx = bins.count - 1;
      } else if (pos > 0.0) {
        idx = static_cast<std::size_t>(pos);
      }
      ++h.counts[idx];
      ++h.n_gates;
    }
    out.push_back(std::move(h));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mixture fit

namespace {

struct WeightedData {
  std::vector<double> x;
  std::vector<double> w;
  double total = 0.0;
};

WeightedData prepare(std::span<const double> samples, std::size_t max_bins) {
  WeightedData d;
  if (samples.size() <= max_bins) {
    d.x.assign(samples.begin(), samples.end());
    d.w.assign(samples.size(), 1.0);
    d.total = static_cast<double>(samples.size());
    return d;
  }
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn, hi = *mx;
  if (!(hi > lo)) {
    d.x = {lo};
    d.w = {static_cast<double>(samples.size())};
    d.total = d.w[0];
    return d;
  }
  // Bin by value; each bin is represented by the mean of its samples.
  std::vector<double> sum(max_bins, 0.0), cnt(max_bins, 0.0);
  const double scale = static_cast<double>(max_bins) / (hi - lo);
  for (double v : samples) {
    auto idx = static_cast<std::size_t>((v - lo) * scale);
    if (idx >= max_bins) idx = max_bins - 1;
    sum[idx] += v;
    cnt[idx] += 1.0;
  }
  for (std::size_t i = 0; i < max_bins; ++i) {
    if (cnt[i] == 0.0) continue;
    d.x.push_back(sum[i] / cnt[i]);
    d.w.push_back(cnt[i]);
  }
  d.total = static_cast<double>(samples.size());
  return d;
}

double weighted_quantile(const WeightedData& d, const std::vector<std::size_t>& order,
                         double q) {
  double target = q * std::accumulate(order.begin(), order.end(), 0.0,
                                      [&](double acc, std::size_t i) { return acc + d.w[i]; });
  for (std::size_t i : order) {
    target -= d.w[i];
    if (target <= 0.0) return d.x[i];
  }
  return d.x[order.back()];
}

double log_density(double x, const MixtureComponent& c) {
  const double z = (x - c.mean) / c.sigma;
  return std::log(c.weight) - std::log(c.sigma) - 0.5 * z * z - kLogSqrt2Pi;
}

struct EmResult {
  MixtureFit fit;
  bool converged = false;
  bool settled = false;  // converged, or still creeping by less than 1000 * tolerance
};

// Poisson(k; mu) for k < K - 1 and the tail P(K >= K - 1) in the last slot.
std::vector<double> poisson_weights(double mu, std::size_t K) {
  std::vector<double> w(K);
  double p = std::exp(-mu), cdf = 0.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    w[k] = p;
    cdf += p;
    p *= mu / static_cast<double>(k + 1);
  }
  w[K - 1] = std::max(1.0 - cdf, 0.0);
  for (auto& x : w) x = std::max(x, 1e-300);
  return w;
}

EmResult run_em(const WeightedData& d, std::vector<MixtureComponent> comps, double sigma_floor,
                double ladder_floor, const MixtureOptions& options) {
  const std::size_t K = comps.size();
  std::vector<double> logp(K), nk(K), sx(K), sxx(K), offset(K), inv_sigma(K);
  double prev_ll = -std::numeric_limits<double>::infinity();
  double last_change = std::numeric_limits<double>::infinity();
  EmResult res;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    std::fill(nk.begin(), nk.end(), 0.0);
    std::fill(sx.begin(), sx.end(), 0.0);
    std::fill(sxx.begin(), sxx.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      offset[k] = comps[k].weight > 0.0
                      ? std::log(comps[k].weight) - std::log(comps[k].sigma) - kLogSqrt2Pi
                      : -std::numeric_limits<double>::infinity();
      inv_sigma[k] = 1.0 / comps[k].sigma;
    }
    double ll = 0.0;
    for (std::size_t j = 0; j < d.x.size(); ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < K; ++k) {
        const double z = (d.x[j] - comps[k].mean) * inv_sigma[k];
        logp[k] = offset[k] - 0.5 * z * z;
        best = std::max(best, logp[k]);
      }
      double norm = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        logp[k] = std::exp(logp[k] - best);
        norm += logp[k];
      }
      ll += d.w[j] * (best + std::log(norm));
      const double scale = d.w[j] / norm;
      for (std::size_t k = 0; k < K; ++k) {
        const double r = scale * logp[k];
        nk[k] += r;
        sx[k] += r * d.x[j];
        sxx[k] += r * d.x[j] * d.x[j];
      }
    }
    ll /= d.total;

    std::vector<double> tied;
    if (options.weights == MixtureWeights::poisson) tied = poisson_weights(fit_poisson_flux(nk), K);
    for (std::size_t k = 0; k < K; ++k) {
      comps[k].weight = tied.empty() ? nk[k] / d.total : tied[k];
      if (nk[k] < std::max(1e-9 * d.total, 1.0)) {
        // Starved component (under one sample): keep it on the ladder so the
        // means stay ordered.
        const double step = K > 1 && k >= 2 ? std::max(comps[1].mean, ladder_floor) : ladder_floor;
        comps[k].mean = k == 0 ? 0.0 : comps[k - 1].mean + step;
        comps[k].sigma = std::max(comps[k].sigma, sigma_floor);
        continue;
      }
      if (k == 0) {
        comps[0].mean = 0.0;
        comps[0].sigma = std::max(sigma_floor, std::sqrt(sxx[0] / nk[0]));
      } else {
        const double mean = sx[k] / nk[k];
        const double var = std::max(0.0, sxx[k] / nk[k] - mean * mean);
        comps[k].mean = mean;
        comps[k].sigma = std::max(sigma_floor, std::sqrt(var));
      }
    }

    last_change = std::abs(ll - prev_ll);
    if (last_change < options.tolerance) {
      res.converged = true;
      prev_ll = ll;
      ++it;
      break;
    }
    prev_ll = ll;
  }
  res.settled = last_change < 1e3 * options.tolerance;
  res.fit.components = std::move(comps);
  res.fit.log_likelihood = prev_ll;
  res.fit.iterations = it;
  res.fit.n_samples = static_cast<std::size_t>(d.total);
  return res;
}

bool means_increasing(const MixtureFit& fit) {
  for (std::size_t k = 1; k < fit.components.size(); ++k) {
    if (!(fit.components[k].mean > fit.components[k - 1].mean)) return false;
  }
  return true;
}

}  // namespace

MixtureFit fit_mixture(std::span<const double> samples, int k_max, const NoiseParams& noise,
                       const MixtureOptions& options) {
  if (samples.size() < 50) throw InsufficientSamples("mixture fit needs at least 50 samples");
  if (k_max < 1 || k_max > 6) throw ConfigError("k_max", "must lie in [1, 6]");
  const std::size_t K = static_cast<std::size_t>(k_max) + 1;

  double spread = 0.0;
  for (double v : samples) spread = std::max(spread, std::abs(v));
  const double sigma_floor = std::max(noise.sigma_electrical, 1e-6 * std::max(spread, 1e-12));
  const double threshold = 5.0 * sigma_floor;

  const WeightedData d = prepare(samples, options.max_bins);
  std::vector<std::size_t> above;
  double above_weight = 0.0, zero_moment = 0.0, zero_weight = 0.0;
  for (std::size_t j = 0; j < d.x.size(); ++j) {
    if (d.x[j] > threshold) {
      above.push_back(j);
      above_weight += d.w[j];
    } else {
      zero_moment += d.w[j] * d.x[j] * d.x[j];
      zero_weight += d.w[j];
    }
  }
  const double frac_above = above_weight / d.total;

  if (frac_above < 0.01) {
    // Nothing resolvable above the noise: a lone zero-photon component.
    MixtureFit fit;
    fit.n_samples = samples.size();
    fit.components.resize(K);
    fit.components[0] = {1.0, 0.0, std::max(sigma_floor, std::sqrt(zero_moment / zero_weight))};
    for (std::size_t k = 1; k < K; ++k) {
      fit.components[k] = {0.0, static_cast<double>(k) * threshold, sigma_floor};
    }
    double ll = 0.0;
    for (std::size_t j = 0; j < d.x.size(); ++j) ll += d.w[j] * log_density(d.x[j], fit.components[0]);
    fit.log_likelihood = ll / d.total;
    return fit;
  }

  std::sort(above.begin(), above.end(), [&](std::size_t a, std::size_t b) { return d.x[a] < d.x[b]; });
  const double median = weighted_quantile(d, above, 0.5);
  const std::vector<double> guesses = {weighted_quantile(d, above, 0.1),
                                       weighted_quantile(d, above, 0.25), median, median / 2.0,
                                       median / 3.0};
  const double w0 = std::clamp(1.0 - frac_above, 1e-6, 1.0 - 1e-6);
  const double flux = -std::log(w0);

  // Best run with `order` photon components, over all ladder starts.
  auto fit_order = [&](std::size_t order) -> std::optional<EmResult> {
    std::optional<EmResult> best;
    for (double m1 : guesses) {
      if (!(m1 > 0.5 * threshold)) continue;
      std::vector<MixtureComponent> comps(order + 1);
      comps[0] = {w0, 0.0, sigma_floor};
      const auto tied = poisson_weights(flux, order + 1);
      double pk = std::exp(-flux), tail = 1.0 - pk;
      for (std::size_t k = 1; k <= order; ++k) {
        pk *= flux / static_cast<double>(k);
        const double share = k == order ? tail : pk;
        tail -= pk;
        const double spread_k = 0.2 * m1 * std::sqrt(static_cast<double>(k));
        const double weight =
            options.weights == MixtureWeights::poisson ? tied[k] : std::max(share, 1e-4);
        comps[k] = {weight, static_cast<double>(k) * m1,
                    std::sqrt(sigma_floor * sigma_floor + spread_k * spread_k)};
      }
      double total_w = 0.0;
      for (const auto& c : comps) total_w += c.weight;
      for (auto& c : comps) c.weight /= total_w;

      EmResult r = run_em(d, std::move(comps), sigma_floor, threshold, options);
      if (!r.settled || !means_increasing(r.fit)) continue;
      if (!best || r.fit.log_likelihood > best->fit.log_likelihood) best = std::move(r);
    }
    return best;
  };

  // The number of occupied photon bands is chosen by the Bayesian information
  // criterion; a skewed band would otherwise be split over spare components.
  std::optional<EmResult> chosen;
  double chosen_bic = std::numeric_limits<double>::infinity();
  const std::size_t first_order = options.weights == MixtureWeights::poisson ? K - 1 : 1;
  for (std::size_t order = first_order; order < K; ++order) {
    auto r = fit_order(order);
    if (!r) continue;
    const double params = 3.0 * static_cast<double>(order) + 1.0;
    const double bic = -2.0 * r->fit.log_likelihood * d.total + params * std::log(d.total);
    if (bic < chosen_bic) {
      chosen_bic = bic;
      chosen = std::move(r);
    }
  }
  if (!chosen) throw ConvergenceError("mixture fit did not converge from any start");

  MixtureFit fit = std::move(chosen->fit);
  const double step = fit.components[1].mean;
  while (fit.components.size() < K) {
    const auto& last = fit.components.back();
    fit.components.push_back({0.0, last.mean + step, last.sigma});
  }
  fit.n_samples = samples.size();
  return fit;
}

int classify_photon_number(double current, const MixtureFit& fit) {
  int best_k = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fit.components.size(); ++k) {
    const auto& c = fit.components[k];
    if (c.weight <= 0.0) continue;
    const double l = log_density(current, c);
    // Rounding in the distances must not break an exact symmetry toward larger k.
    const double margin = std::isfinite(best) ? 1e-12 * std::max(1.0, std::abs(best)) : 0.0;
    if (l > best + margin) {
      best = l;
      best_k = static_cast<int>(k);
    }
  }
  return best_k;
}

// ---------------------------------------------------------------------------
// Noise factor

std::string to_string(MixtureWeights weights) {
  return weights == MixtureWeights::poisson ? "poisson" : "free";
}

MixtureWeights mixture_weights_from_string(const std::string& name) {
  if (name == "poisson") return MixtureWeights::poisson;
  if (name == "free") return MixtureWeights::free;
  throw ConfigError("mixture_weights", "unknown weight model '" + name + "'");
}

std::string to_string(BandSelection selection) {
  switch (selection) {
    case BandSelection::by_fit: return "by_fit";
    case BandSelection::by_threshold: return "by_threshold";
    case BandSelection::by_truth: return "by_truth";
  }
  return "by_fit";
}

BandSelection band_selection_from_string(const std::string& name) {
  if (name == "by_fit") return BandSelection::by_fit;
  if (name == "by_threshold") return BandSelection::by_threshold;
  if (name == "by_truth") return BandSelection::by_truth;
  throw ConfigError("selection", "unknown band selection '" + name + "'");
}

RatioEstimate noise_factor_estimate(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw UndefinedStatistic("noise factor needs at least two samples");
  long double s1 = 0.0L, s2 = 0.0L;
  for (double x : samples) {
    s1 += x;
    s2 += static_cast<long double>(x) * x;
  }
  if (s1 <= 0.0L) throw UndefinedStatistic("noise factor undefined for nonpositive mean current");
  const long double nn = static_cast<long double>(n);
  const long double value = (s2 / nn) / ((s1 / nn) * (s1 / nn));

  // Delete-one jackknife.
  long double sum_f = 0.0L, sum_f2 = 0.0L;
  for (double x : samples) {
    const long double m1 = (s1 - x) / (nn - 1.0L);
    const long double m2 = (s2 - static_cast<long double>(x) * x) / (nn - 1.0L);
    const long double f = m2 / (m1 * m1);
    sum_f += f;
    sum_f2 += f * f;
  }
  const long double mean_f = sum_f / nn;
  const long double var = std::max(0.0L, sum_f2 / nn - mean_f * mean_f);
  return {static_cast<double>(value), static_cast<double>(std::sqrt((nn - 1.0L) * var))};
}

NoiseFactorSeries noise_factor_series(const TraceBundle& bundle, std::span<const double> times,
                                      BandSelection selection, const NoiseFactorOptions& options) {
  if (bundle.traces.empty()) throw InsufficientSamples("noise factor of an empty bundle");
  const auto& truth = bundle.manifest.photon_counts;
  if (selection == BandSelection::by_truth && truth.size() != bundle.traces.size()) {
    throw InsufficientSamples("bundle lacks ground-truth photon counts");
  }
  NoiseFactorSeries out;
  std::vector<double> selected;
  for (double t : times) {
    const auto samples = slice_samples(bundle, t);
    selected.clear();
    switch (selection) {
      case BandSelection::by_truth:
        for (std::size_t g = 0; g < samples.size(); ++g) {
          if (truth[g] == 1) selected.push_back(samples[g]);
        }
        break;
      case BandSelection::by_threshold: {
        const double cut = options.threshold_sigmas * options.noise.sigma_electrical;
        for (double v : samples) {
          if (v > cut) selected.push_back(v);
        }
        break;
      }
      case BandSelection::by_fit: {
        MixtureFit fit;
        try {
          fit = fit_mixture(samples, options.k_max, options.noise);
        } catch (const ConvergenceError&) {
          out.omitted.push_back(t);
          continue;
        }
        for (double v : samples) {
          if (classify_photon_number(v, fit) == 1) selected.push_back(v);
        }
        break;
      }
    }
    if (selected.size() < options.min_samples) {
      out.omitted.push_back(t);
      continue;
    }
    RatioEstimate est;
    try {
      est = noise_factor_estimate(selected);
    } catch (const UndefinedStatistic&) {
      out.omitted.push_back(t);
      continue;
    }
    out.times.push_back(t);
    out.values.push_back(est.value);
    out.std_errors.push_back(est.std_error);
    out.counts.push_back(selected.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resolution

double decision_boundary(const MixtureComponent& a, const MixtureComponent& b) {
  const double lo = std::min(a.mean, b.mean), hi = std::max(a.mean, b.mean);
  const double mid = 0.5 * (a.mean + b.mean);
  if (std::abs(a.sigma - b.sigma) <= 1e-12 * std::max(a.sigma, b.sigma)) return mid;
  // (x - ma)^2 / sa^2 - (x - mb)^2 / sb^2 = 2 ln(sb / sa)
  const double ia = 1.0 / (a.sigma * a.sigma), ib = 1.0 / (b.sigma * b.sigma);
  const double qa = ia - ib;
  const double qb = -2.0 * (a.mean * ia - b.mean * ib);
  const double qc = a.mean * a.mean * ia - b.mean * b.mean * ib - 2.0 * std::log(b.sigma / a.sigma);
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return mid;
  const double root = std::sqrt(disc);
  for (double x : {(-qb + root) / (2.0 * qa), (-qb - root) / (2.0 * qa)}) {
    if (x >= lo && x <= hi) return x;
  }
  return mid;
}

double pairwise_misclassification(const MixtureComponent& a, const MixtureComponent& b) {
  const MixtureComponent& low = a.mean <= b.mean ? a : b;
  const MixtureComponent& high = a.mean <= b.mean ? b : a;
  const double x = decision_boundary(low, high);
  const double tail_low = 1.0 - normal_cdf((x - low.mean) / low.sigma);
  const double tail_high = normal_cdf((x - high.mean) / high.sigma);
  return 0.5 * (tail_low + tail_high);
}

double fit_poisson_flux(std::span<const double> weights) {
  if (weights.size() < 2) throw UndefinedStatistic("flux fit needs at least two weights");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw UndefinedStatistic("flux fit needs positive weights");
  const std::size_t K = weights.size() - 1;
  auto loglik = [&](double mu) {
    double ll = 0.0, p = std::exp(-mu), cdf = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (weights[k] > 0.0) ll += weights[k] / total * std::log(std::max(p, 1e-300));
      cdf += p;
      p *= mu / static_cast<double>(k + 1);
    }
    if (weights[K] > 0.0) ll += weights[K] / total * std::log(std::max(1.0 - cdf, 1e-300));
    return ll;
  };
  // Golden-section search on log(mu); the log-likelihood is unimodal in mu.
  double a = std::log(1e-6), b = std::log(100.0);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = loglik(std::exp(c)), fd = loglik(std::exp(d));
  for (int i = 0; i < 200; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = loglik(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = loglik(std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

ResolutionReport resolution_report(const MixtureFit& fit) {
  if (fit.components.size() < 2) throw UndefinedStatistic("resolution needs two components");
  ResolutionReport r;
  std::vector<double> weights;
  for (std::size_t k = 0; k < fit.components.size(); ++k) {
    const auto& c = fit.components[k];
    r.widths_fwhm.push_back(kFwhmPerSigma * c.sigma);
    weights.push_back(c.weight);
    if (k + 1 < fit.components.size()) {
      const auto& next = fit.components[k + 1];
      r.separations.push_back(next.mean - c.mean);
      r.misclassification.push_back(pairwise_misclassification(c, next));
    }
  }
  r.flux_estimate = fit_poisson_flux(weights);
  return r;
}

// ---------------------------------------------------------------------------
// Knife edge

SpotEstimate estimate_spot_diameter(std::span<const ScanPoint> scan) {
  if (scan.size() < 20) throw InvalidScan("edge scan needs at least 20 points");
  std::vector<ScanPoint> pts(scan.begin(), scan.end());
  std::sort(pts.begin(), pts.end(), [](const ScanPoint& a, const ScanPoint& b) { return a.x < b.x; });

  double vmin = pts.front().value, vmax = vmin;
  for (const auto& p : pts) {
    vmin = std::min(vmin, p.value);
    vmax = std::max(vmax, p.value);
  }
  const double range = vmax - vmin;
  if (!(range > 1e-12 * std::max(1.0, std::abs(vmax)))) {
    throw InvalidScan("edge scan is flat; the spot never crosses an edge");
  }
  const double direction = pts.back().value >= pts.front().value ? 1.0 : -1.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (direction * (pts[i].value - pts[i - 1].value) < -0.05 * range) {
      throw InvalidScan("edge scan is not monotonic");
    }
  }

  const std::size_t n = pts.size();
  std::vector<double> xs, ds;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    xs.push_back(pts[i].x);
    ds.push_back(direction * (pts[i + 1].value - pts[i - 1].value) / (pts[i + 1].x - pts[i - 1].x));
  }
  const double step = (pts.back().x - pts.front().x) / static_cast<double>(n - 1);

  // Moment start for the Gaussian fit.
  double w = 0.0, m = 0.0, v = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double wi = std::max(0.0, ds[i]);
    w += wi;
    m += wi * xs[i];
    peak = std::max(peak, ds[i]);
  }
  m /= w;
  for (std::size_t i = 0; i < xs.size(); ++i) v += std::max(0.0, ds[i]) * (xs[i] - m) * (xs[i] - m);
  v /= w;

  double amp = peak, center = m, sigma = std::max(std::sqrt(v), 0.25 * step);
  auto sse = [&](double A, double c, double s) {
    double e = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double u = (xs[i] - c) / s;
      const double r = ds[i] - A * std::exp(-0.5 * u * u);
      e += r * r;
    }
    return e;
  };
  // Levenberg-Marquardt on (amplitude, center, sigma).
  double lambda = 1e-3, err = sse(amp, center, sigma);
  for (int it = 0; it < 200; ++it) {
    double jtj[3][3] = {}, jtr[3] = {};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double u = (xs[i] - center) / sigma;
      const double e = std::exp(-0.5 * u * u);
      const double r = ds[i] - amp * e;
      const double jac[3] = {e, amp * e * u / sigma, amp * e * u * u / sigma};
      for (int a = 0; a < 3; ++a) {
        jtr[a] += jac[a] * r;
        for (int b = 0; b < 3; ++b) jtj[a][b] += jac[a] * jac[b];
      }
    }
    bool improved = false;
    for (int attempt = 0; attempt < 20 && !improved; ++attempt) {
      double A[3][4];
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) A[a][b] = jtj[a][b] + (a == b ? lambda * jtj[a][a] : 0.0);
        A[a][3] = jtr[a];
      }
      // Gaussian elimination with partial pivoting.
      bool singular = false;
      for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
          if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        }
        if (std::abs(A[piv][col]) < 1e-300) {
          singular = true;
          break;
        }
        for (int c = 0; c < 4; ++c) std::swap(A[col][c], A[piv][c]);
        for (int r = 0; r < 3; ++r) {
          if (r == col) continue;
          const double f = A[r][col] / A[col][col];
          for (int c = col; c < 4; ++c) A[r][c] -= f * A[col][c];
        }
      }
      if (singular) {
        lambda *= 10.0;
        continue;
      }
      const double na = amp + A[0][3] / A[0][0];
      const double nc = center + A[1][3] / A[1][1];
      const double ns = sigma + A[2][3] / A[2][2];
      if (ns > 0.0) {
        const double ne = sse(na, nc, ns);
        if (ne < err) {
          amp = na;
          center = nc;
          sigma = ns;
          const double rel = (err - ne) / std::max(err, 1e-300);
          err = ne;
          lambda = std::max(lambda * 0.3, 1e-12);
          improved = true;
          if (rel < 1e-14) it = 1000;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }

  // Central differences convolve the derivative with a box of width 2h,
  // which adds h^2 / 3 to its variance.
  const double var = std::max(0.0, sigma * sigma - step * step / 3.0);
  return {kFwhmPerSigma * std::sqrt(var), center, 2.0 * step};
}

}  // namespace apd
