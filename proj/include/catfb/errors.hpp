// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CATFB_ERRORS_HPP
#define CATFB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace catfb {

// Thrown when a computation would push significant weight past a truncation
// boundary (photon-number cutoff, Kraus-rank cap, phase-space window) and the
// neglected mass would exceed the configured tolerance.
class truncation_error : public std::runtime_error {
 public:
  explicit truncation_error(const std::string& what_arg)
      : std::runtime_error(what_arg) {}
};

// Thrown when an iterative numerical routine cannot reach its requested
// tolerance within its resource budget (e.g. step-doubling cap).
class tolerance_error : public std::runtime_error {
 public:
  explicit tolerance_error(const std::string& what_arg)
      : std::runtime_error(what_arg) {}
};

// Thrown on malformed or inconsistent configuration input.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what_arg)
      : std::runtime_error(what_arg) {}
};

}  // namespace catfb

#endif  // CATFB_ERRORS_HPP
