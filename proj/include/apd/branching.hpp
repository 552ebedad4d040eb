// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apd/rng.hpp"

namespace apd {

enum class OffspringKind { bernoulli, dead_space };

std::string to_string(OffspringKind kind);
OffspringKind offspring_kind_from_string(const std::string& name);

/// Per-step impact-ionization law of a single multiplying carrier.
///
/// bernoulli: every carrier spawns one new carrier with probability p_ionize
/// per step. dead_space: a carrier younger than dead_steps never spawns, older
/// carriers spawn with p_post. A dead_space model with dead_steps == 0 is the
/// bernoulli model with p_ionize = p_post.
struct OffspringModel {
  OffspringKind kind = OffspringKind::dead_space;
  double p_ionize = 0.0;
  int dead_steps = 0;
  double p_post = 0.0;

  static OffspringModel bernoulli(double p);
  static OffspringModel dead_space(int dead_steps, double p_post);

  /// Throws ConfigError when a probability is outside [0, 1] or dead_steps < 0.
  void validate() const;

  /// Age (in steps) at which carriers become able to ionize.
  int eligible_age() const noexcept;
  /// Spawn probability of an eligible carrier.
  double spawn_probability() const noexcept;
};

/// Carrier population bucketed by age in steps. Bucket k < eligible_age holds
/// carriers of age exactly k; the last bucket holds every carrier old enough
/// to ionize.
class PopulationState {
 public:
  PopulationState() = default;
  explicit PopulationState(const OffspringModel& model, std::uint64_t seeds = 0);

  /// Adds newly injected carriers at age 0.
  void inject(std::uint64_t carriers);

  std::uint64_t total() const noexcept { return total_; }
  const std::vector<std::uint64_t>& ages() const noexcept { return ages_; }
  std::uint64_t eligible() const noexcept { return ages_.empty() ? 0 : ages_.back(); }

 private:
  friend PopulationState step_population(const PopulationState&, const OffspringModel&,
                                         RngStream&);
  std::vector<std::uint64_t> ages_;
  std::uint64_t total_ = 0;
};

inline constexpr std::uint64_t kPopulationCap = (std::uint64_t{1} << 63) - 1;

/// Advances the population by one step: each eligible carrier independently
/// spawns one carrier at age 0, then all existing carriers age by one step.
/// Throws PopulationOverflow if the total would exceed kPopulationCap.
PopulationState step_population(const PopulationState& state, const OffspringModel& model,
                                RngStream& rng);

struct GainSample {
  double gain = 1.0;         // final carriers per seed
  std::uint64_t seeds = 1;
};

GainSample simulate_gain(std::uint64_t n_seeds, int n_steps, const OffspringModel& model,
                         RngStream& rng);

/// <M^2> / <M>^2 over the samples. Needs at least two samples and a nonzero mean.
double excess_noise_factor(std::span<const GainSample> samples);

/// Large-gain limit 1 + (1 - p) / (1 + p) of the excess noise factor for
/// offspring 1 + Bernoulli(p). Throws UndefinedStatistic for p = 0.
double analytic_limit_noise(double p_ionize);

/// Excess noise factor at finite step count s for the bernoulli model:
/// 1 + (1 - p) / (1 + p) * (1 - (1 + p)^-s).
double finite_step_noise(double p_ionize, int steps);

/// Noise factor predicted for n independent seeds given the 1-seed value.
double seed_scaling_check(double f1, int n);

}  // namespace apd
