// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/branching.hpp"

#include <cmath>

#include "apd/error.hpp"
#include "apd/sampling.hpp"

namespace apd {

std::string to_string(OffspringKind kind) {
  return kind == OffspringKind::bernoulli ? "bernoulli" : "dead_space";
}

OffspringKind offspring_kind_from_string(const std::string& name) {
  if (name == "bernoulli") return OffspringKind::bernoulli;
  if (name == "dead_space") return OffspringKind::dead_space;
  throw ConfigError("model.kind", "unknown offspring model '" + name + "'");
}

OffspringModel OffspringModel::bernoulli(double p) {
  OffspringModel m;
  m.kind = OffspringKind::bernoulli;
  m.p_ionize = p;
  return m;
}

OffspringModel OffspringModel::dead_space(int dead_steps, double p_post) {
  OffspringModel m;
  m.kind = OffspringKind::dead_space;
  m.dead_steps = dead_steps;
  m.p_post = p_post;
  return m;
}

void OffspringModel::validate() const {
  auto check_prob = [](const char* field, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(field, "probability must lie in [0, 1]");
  };
  check_prob("model.p_ionize", p_ionize);
  if (kind == OffspringKind::dead_space) {
    check_prob("model.p_post", p_post);
    if (dead_steps < 0) throw ConfigError("model.dead_steps", "must be nonnegative");
  }
}

int OffspringModel::eligible_age() const noexcept {
  return kind == OffspringKind::dead_space ? dead_steps : 0;
}

double OffspringModel::spawn_probability() const noexcept {
  return kind == OffspringKind::dead_space ? p_post : p_ionize;
}

PopulationState::PopulationState(const OffspringModel& model, std::uint64_t seeds)
    : ages_(static_cast<std::size_t>(model.eligible_age()) + 1, 0) {
  inject(seeds);
}

void PopulationState::inject(std::uint64_t carriers) {
  if (carriers > kPopulationCap - total_) throw PopulationOverflow("carrier count exceeds cap");
  if (ages_.empty()) ages_.assign(1, 0);
  ages_.front() += carriers;
  total_ += carriers;
}

PopulationState step_population(const PopulationState& state, const OffspringModel& model,
                                RngStream& rng) {
  const std::size_t buckets = static_cast<std::size_t>(model.eligible_age()) + 1;
  if (state.ages_.size() != buckets) {
    throw ConfigError("model.dead_steps", "population age buckets do not match the model");
  }
  const std::uint64_t spawned = draw_binomial(state.eligible(), model.spawn_probability(), rng);
  if (spawned > kPopulationCap - state.total_) {
    throw PopulationOverflow("carrier count exceeds 2^63-1; apply current saturation first");
  }

  PopulationState next;
  next.total_ = state.total_ + spawned;
  next.ages_.resize(buckets);
  if (buckets == 1) {
    next.ages_[0] = state.ages_[0] + spawned;
  } else {
    next.ages_[0] = spawned;
    for (std::size_t k = 1; k + 1 < buckets; ++k) next.ages_[k] = state.ages_[k - 1];
    next.ages_[buckets - 1] = state.ages_[buckets - 1] + state.ages_[buckets - 2];
  }
  return next;
}

GainSample simulate_gain(std::uint64_t n_seeds, int n_steps, const OffspringModel& model,
                         RngStream& rng) {
  if (n_seeds == 0) throw ConfigError("n_seeds", "must be at least 1");
  PopulationState state(model, n_seeds);
  for (int s = 0; s < n_steps; ++s) state = step_population(state, model, rng);
  return {static_cast<double>(state.total()) / static_cast<double>(n_seeds), n_seeds};
}

double excess_noise_factor(std::span<const GainSample> samples) {
  if (samples.size() < 2) throw UndefinedStatistic("excess noise factor needs >= 2 samples");
  long double sum = 0.0L, sum_sq = 0.0L;
  for (const auto& s : samples) {
    sum += s.gain;
    sum_sq += static_cast<long double>(s.gain) * s.gain;
  }
  const long double n = static_cast<long double>(samples.size());
  const long double mean = sum / n;
  if (mean == 0.0L) throw UndefinedStatistic("excess noise factor undefined for zero mean gain");
  return static_cast<double>((sum_sq / n) / (mean * mean));
}

double analytic_limit_noise(double p_ionize) {
  if (!(p_ionize > 0.0 && p_ionize <= 1.0)) {
    throw UndefinedStatistic("limit noise factor needs 0 < p <= 1");
  }
  return 1.0 + (1.0 - p_ionize) / (1.0 + p_ionize);
}

double finite_step_noise(double p_ionize, int steps) {
  if (!(p_ionize > 0.0 && p_ionize <= 1.0)) {
    throw UndefinedStatistic("noise factor needs 0 < p <= 1");
  }
  return 1.0 + (1.0 - p_ionize) / (1.0 + p_ionize) * (1.0 - std::pow(1.0 + p_ionize, -steps));
}

double seed_scaling_check(double f1, int n) {
  if (n < 1) throw ConfigError("n", "seed count must be positive");
  return 1.0 + (f1 - 1.0) / n;
}

}  // namespace apd
