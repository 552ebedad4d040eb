// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "apd/trace.hpp"

#include <cmath>

namespace apd {

std::size_t Trace::index_at(double t) const noexcept {
  if (samples.empty()) return 0;
  const double pos = std::round((t - t0) / dt);
  if (pos <= 0.0) return 0;
  const auto last = samples.size() - 1;
  return pos >= static_cast<double>(last) ? last : static_cast<std::size_t>(pos);
}

}  // namespace apd
