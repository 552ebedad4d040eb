// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "apd/acquisition.hpp"
#include "apd/config.hpp"

namespace apd {

struct GateRecord {
  Trace trace;  // noisy, t0 on the delay axis
  std::uint32_t photons = 0;
};

/// Simulates gate `gate_index` of a run. Depends only on the config and the
/// index: every random draw comes from that gate's own streams.
GateRecord simulate_gate_record(const SimConfig& config, std::uint64_t gate_index);

/// Runs all gates on `workers` threads and assembles the bundle in gate
/// order. The result does not depend on the number of workers.
TraceBundle run_simulation(const SimConfig& config, unsigned workers = 1);

/// Fraction of gates with at least one detected photon.
double trigger_fraction(const TraceBundle& bundle);

}  // namespace apd
