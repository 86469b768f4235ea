// Copyright 2026 The fastfm-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fastfm {

/// Caller broke a documented precondition (bad index, mismatched shapes, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  enum class Kind { syntax, structure, range };

  ParseError(const std::string& what, std::size_t line, Kind kind = Kind::syntax)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        kind_(kind) {}

  std::size_t line() const noexcept { return line_; }
  Kind kind() const noexcept { return kind_; }

 private:
  std::size_t line_;
  Kind kind_;
};

/// Model file is truncated, of the wrong version, or inconsistent.
class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fastfm
