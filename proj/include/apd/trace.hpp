// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace apd {

/// Uniformly sampled current record, as an oscilloscope would store it.
struct Trace {
  double t0 = 0.0;             // ns, time of samples[0]
  double dt = 0.01;            // ns
  std::vector<float> samples;  // mA

  double time(std::size_t i) const noexcept { return t0 + static_cast<double>(i) * dt; }
  /// Index of the sample nearest to t, clamped to the record.
  std::size_t index_at(double t) const noexcept;
  double value_at(double t) const noexcept { return samples.empty() ? 0.0 : samples[index_at(t)]; }

  friend bool operator==(const Trace&, const Trace&) = default;
};

}  // namespace apd
