// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apd/error.hpp"

namespace apd {

void CalibrationTargets::validate() const {
  if (anchors.size() < 2) throw ConfigError("targets.anchors", "need at least two growth anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (!(anchors[i].t >= 0.0)) throw ConfigError("targets.anchors", "anchor times must be >= 0");
    if (!(anchors[i].current > 0.0)) {
      throw ConfigError("targets.anchors", "anchor currents must be positive");
    }
    if (i > 0 && !(anchors[i].t > anchors[i - 1].t)) {
      throw ConfigError("targets.anchors", "anchor times must be strictly increasing");
    }
  }
  if (!(plateau >= 1.0)) throw ConfigError("targets.plateau", "a noise factor is never below 1");
  if (plateau_window && !(plateau_window->second >= plateau_window->first &&
                          plateau_window->first >= 0.0)) {
    throw ConfigError("targets.plateau.window", "window must be ordered and nonnegative");
  }
  if (noise) noise->validate();
  if (width && !(width->fwhm > 0.0 && width->t >= 0.0)) {
    throw ConfigError("targets.width", "need t >= 0 and fwhm > 0");
  }
}

double EnsembleMoments::noise_factor(std::size_t k, double sigma_electrical) const {
  if (!(mean.at(k) > 0.0)) throw UndefinedStatistic("noise factor undefined for zero mean current");
  return (second[k] + sigma_electrical * sigma_electrical) / (mean[k] * mean[k]);
}

std::size_t EnsembleMoments::index_at(double t) const {
  if (times.empty()) throw UndefinedStatistic("empty ensemble");
  const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
  const auto k = static_cast<std::ptrdiff_t>(std::llround((t - times.front()) / dt));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, times.size() - 1));
}

EnsembleMoments simulate_ensemble(int n_seeds, const DeviceParams& device,
                                  const OffspringModel& model, std::size_t n_gates,
                                  std::uint64_t seed, double dt, double t_end,
                                  double arrival_time) {
  if (n_seeds < 0) throw ConfigError("n_seeds", "must be nonnegative");
  GateSeeds seeds;
  seeds.positions.assign(static_cast<std::size_t>(n_seeds), Point{});
  seeds.arrival_times.assign(static_cast<std::size_t>(n_seeds), arrival_time);
  const RecordWindow window{arrival_time, arrival_time + t_end};

  EnsembleMoments m;
  m.n_gates = n_gates;
  for (std::uint64_t g = 0; g < n_gates; ++g) {
    RngStream rng = gate_stream(seed, g, StreamPurpose::avalanche);
    const Trace tr = simulate_gate(seeds, device, model, rng, dt, window);
    if (m.mean.empty()) {
      m.mean.assign(tr.samples.size(), 0.0);
      m.second.assign(tr.samples.size(), 0.0);
      for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        m.times.push_back(static_cast<double>(k) * dt);
      }
    }
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
      const double v = tr.samples[k];
      m.mean[k] += v;
      m.second[k] += v * v;
    }
  }
  if (n_gates > 0) {
    for (std::size_t k = 0; k < m.mean.size(); ++k) {
      m.mean[k] /= static_cast<double>(n_gates);
      m.second[k] /= static_cast<double>(n_gates);
    }
  }
  return m;
}

namespace {

// Expected carrier count per step from one seed, with the feedback evaluated
// on the mean current.
std::vector<double> mean_field_counts(const OffspringModel& model, const DeviceParams& device,
                                      double scale, std::size_t n_steps) {
  const std::size_t buckets = static_cast<std::size_t>(model.eligible_age()) + 1;
  std::vector<double> ages(buckets, 0.0), next(buckets, 0.0);
  ages[0] = 1.0;
  double total = 1.0;
  const double excess = device.excess_bias();
  std::vector<double> out{total};
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double ov = std::max(0.0, excess - total * scale * device.r_feedback_total * 1e-3);
    const double p = ionization_prob(ov, model, excess).spawn_probability();
    const double spawned = p * ages.back();
    if (buckets == 1) {
      ages[0] += spawned;
    } else {
      next[0] = spawned;
      for (std::size_t k = 1; k + 1 < buckets; ++k) next[k] = ages[k - 1];
      next.back() = ages.back() + ages[buckets - 2];
      std::swap(ages, next);
    }
    total += spawned;
    out.push_back(total);
  }
  return out;
}

}  // namespace

CalibrationResult calibrate_model(const CalibrationTargets& targets, const DeviceParams& device,
                                  double tol, const CalibrationOptions& options) {
  targets.validate();
  device.validate();
  if (!(tol > 0.0)) throw ConfigError("tolerance", "must be positive");
  if (options.min_dead_steps < 0 || options.max_dead_steps < options.min_dead_steps) {
    throw ConfigError("calibration.dead_steps", "invalid search bounds");
  }
  if (options.n_gates < 2) throw ConfigError("calibration.n_gates", "need at least two gates");

  const auto& anchors = targets.anchors;
  const auto [w_lo, w_hi] = targets.plateau_window.value_or(
      std::pair{anchors.front().t, anchors.back().t});
  double t_end = std::max(anchors.back().t, w_hi);
  if (targets.width) t_end = std::max(t_end, targets.width->t);
  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / options.dt));
  std::vector<std::size_t> anchor_index;
  for (const auto& a : anchors) {
    anchor_index.push_back(static_cast<std::size_t>(std::llround(a.t / options.dt)));
  }
  const double target_ratio = anchors.back().current / anchors.front().current;
  const double sigma = targets.noise ? targets.noise->sigma_electrical : 0.0;

  auto fit_scale = [&](const std::vector<double>& counts) {
    double log_sum = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      log_sum += std::log(anchors[i].current / counts[anchor_index[i]]);
    }
    return std::exp(log_sum / static_cast<double>(anchors.size()));
  };

  CalibrationResult result;
  double best_distance = std::numeric_limits<double>::infinity();
  double closest_distance = std::numeric_limits<double>::infinity();
  CalibrationCandidate closest;

  for (int d = options.min_dead_steps; d <= options.max_dead_steps; ++d) {
    CalibrationCandidate c;
    c.model = OffspringModel::dead_space(d, 1.0);
    double scale = 0.0;  // first pass without feedback

    auto ratio_at = [&](double p) {
      c.model.p_post = p;
      const auto counts = mean_field_counts(c.model, device, scale, n_steps);
      return counts[anchor_index.back()] / counts[anchor_index.front()];
    };

    // The current scale sets the feedback, which shifts the ratio slightly;
    // alternate the two fits until the scale settles.
    bool reachable = true;
    for (int round = 0; round < 8 && reachable; ++round) {
      if (ratio_at(1.0) < target_ratio) {
        reachable = false;
        break;
      }
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ratio_at(mid) < target_ratio ? lo : hi) = mid;
      }
      c.model.p_post = 0.5 * (lo + hi);
      scale = fit_scale(mean_field_counts(c.model, device, scale, n_steps));
    }
    if (!reachable) {
      c.model.p_post = 1.0;
      c.current_per_carrier_scale =
          fit_scale(mean_field_counts(c.model, device, scale, n_steps));
      result.candidates.push_back(c);
      continue;
    }
    c.current_per_carrier_scale = scale;

    DeviceParams dev = device;
    dev.current_per_carrier_scale = scale;
    const auto moments = simulate_ensemble(1, dev, c.model, options.n_gates, options.seed,
                                           options.dt, t_end, options.arrival_time);
    bool within = true;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      const double sim = moments.mean[anchor_index[i]];
      c.anchor_currents.push_back(sim);
      c.residuals.push_back(sim / anchors[i].current - 1.0);
      within = within && std::abs(c.residuals.back()) <= tol;
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = moments.index_at(w_lo); k <= moments.index_at(w_hi); ++k) {
      sum += moments.noise_factor(k, sigma);
      ++count;
    }
    c.plateau = sum / static_cast<double>(count);
    c.plateau_residual = c.plateau / targets.plateau - 1.0;
    c.feasible = within && std::abs(c.plateau_residual) <= tol;
    double distance = c.plateau_residual * c.plateau_residual;
    double worst = std::abs(c.plateau_residual);
    if (targets.width) {
      const std::size_t k = moments.index_at(targets.width->t);
      const double var = std::max(0.0, moments.second[k] - moments.mean[k] * moments.mean[k]);
      c.width = kFwhmPerSigma * std::sqrt(var + sigma * sigma);
      c.width_residual = c.width / targets.width->fwhm - 1.0;
      c.feasible = c.feasible && std::abs(c.width_residual) <= tol;
      distance += c.width_residual * c.width_residual;
      worst = std::max(worst, std::abs(c.width_residual));
    }

    for (double r : c.residuals) worst = std::max(worst, std::abs(r));
    if (worst < closest_distance) {
      closest_distance = worst;
      closest = c;
    }
    if (c.feasible && distance < best_distance) {
      best_distance = distance;
      result.best = c;
    }
    result.candidates.push_back(std::move(c));
  }

  if (!std::isfinite(best_distance)) {
    std::string report = "no dead_space model matches the targets within tolerance";
    if (std::isfinite(closest_distance)) report += "; closest: " + describe(closest, targets);
    throw InfeasibleTargets(report);
  }
  return result;
}

std::string describe(const CalibrationCandidate& c, const CalibrationTargets& targets) {
  std::ostringstream os;
  os.precision(4);
  os << "dead_steps=" << c.model.dead_steps << " p_post=" << c.model.p_post
     << " scale=" << c.current_per_carrier_scale << " mA/carrier";
  for (std::size_t i = 0; i < c.anchor_currents.size() && i < targets.anchors.size(); ++i) {
    os << "; I(" << targets.anchors[i].t * 1000.0 << " ps)=" << c.anchor_currents[i]
       << " mA (" << (c.residuals[i] >= 0 ? "+" : "") << 100.0 * c.residuals[i] << "%)";
  }
  os << "; plateau=" << c.plateau << " (" << (c.plateau_residual >= 0 ? "+" : "")
     << 100.0 * c.plateau_residual << "%)";
  if (targets.width && c.width > 0.0) {
    os << "; FWHM(" << targets.width->t * 1000.0 << " ps)=" << c.width << " mA ("
       << (c.width_residual >= 0 ? "+" : "") << 100.0 * c.width_residual << "%)";
  }
  return os.str();
}

}  // namespace apd
