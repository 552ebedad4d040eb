// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace apd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Carrier count would exceed the population cap (2^63 - 1).
class PopulationOverflow : public Error {
 public:
  using Error::Error;
};

/// A statistic is undefined for the given input (empty set, zero mean, ...).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter or configuration value. `field()` names the offending
/// key using dotted config paths where one exists (e.g. "device.v_dc").
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class InfeasibleTargets : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class InvalidScan : public Error {
 public:
  using Error::Error;
};

}  // namespace apd
