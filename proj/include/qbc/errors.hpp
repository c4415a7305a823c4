// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace qbc {

/// Shape or length mismatch between arrays, layers or configs.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the domain an operation is defined on (e.g. a point outside
/// the unit cube).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid or inconsistent configuration value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A labelling oracle failed (child process error, timeout, bad output).
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The oracle result cache on disk is unreadable or corrupt.
class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A persisted file (checkpoint, dataset log, config) is malformed.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qbc
