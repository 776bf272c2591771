// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace adapterforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An activation plan names an adapter that is not installed, or a route
/// cannot be served by the experiment.
class RoutingError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, manifest, preset or CLI argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage needs a checkpoint that has not been produced yet.
class MissingPrerequisiteError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Corpus construction or corpus file problems.
class CorpusError : public Error {
 public:
  using Error::Error;
};

/// Misuse of an API contract (double backward, bad argument ranges, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint or data file cannot be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace adapterforge
