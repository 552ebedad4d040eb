// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace apd {

GateRecord simulate_gate_record(const SimConfig& config, std::uint64_t gate_index) {
  const GateSeeds seeds = sample_gate_seeds(config.source, config.master_seed, gate_index);
  RngStream avalanche = gate_stream(config.master_seed, gate_index, StreamPurpose::avalanche);
  GateOptions options;
  options.mode = config.saturation;
  options.spot_radius = config.source.spot_radius();
  Trace trace = simulate_gate(seeds, config.device, config.model, avalanche, config.dt,
                              config.gate_window(), options);
  RngStream noise = gate_stream(config.master_seed, gate_index, StreamPurpose::noise);
  trace = add_electrical_noise(std::move(trace), config.noise, noise);
  trace.t0 = config.record_window.first;
  return {std::move(trace), static_cast<std::uint32_t>(seeds.n_photons())};
}

TraceBundle run_simulation(const SimConfig& config, unsigned workers) {
  config.validate();
  const std::size_t n = config.n_gates;
  TraceBundle bundle;
  bundle.traces.resize(n);
  bundle.manifest.photon_counts.resize(n);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t g = next++; g < n; g = next++) {
        GateRecord r = simulate_gate_record(config, g);
        bundle.traces[g] = std::move(r.trace);
        bundle.manifest.photon_counts[g] = r.photons;
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n;
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  bundle.manifest.config = config_to_json(config);
  bundle.manifest.master_seed = config.master_seed;
  bundle.manifest.gate_count = n;
  bundle.manifest.created_utc = utc_timestamp();
  return bundle;
}

double trigger_fraction(const TraceBundle& bundle) {
  const auto& counts = bundle.manifest.photon_counts;
  if (counts.empty()) return 0.0;
  const auto hits = std::count_if(counts.begin(), counts.end(), [](std::uint32_t c) { return c > 0; });
  return static_cast<double>(hits) / static_cast<double>(counts.size());
}

}  // namespace apd
