// SPDX-License-Identifier: Apache-2.0
//
// tdlforge: tapped-delay-line extraction and channel reconstruction toolkit
// Copyright (C) 2026 The tdlforge authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace tdlforge {

/// Root of every error raised by the library. Callers that only need to
/// distinguish "library rejected the input" from other failures can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix lengths or shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (window of zero, fractions that do not sum to one, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition on the arguments was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A position (delay, crop footprint) lies outside the supported range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given input (e.g. an all-sentinel PDP).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// No bin of the APDP lies above the absolute noise floor.
class AllNoiseError : public Error {
 public:
  using Error::Error;
};

/// Tap extraction produced no taps.
class NoMultipathError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. Carries the 1-based line/row number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// Well-formed content that violates a type invariant. Carries the offending field.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& what, long line = 0)
      : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
              (field.empty() ? what : field + ": " + what)),
        field_(field),
        reason_(what),
        line_(line) {}
  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }
  long line() const noexcept { return line_; }

 private:
  std::string field_;
  std::string reason_;
  long line_;
};

/// File system failures (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdlforge
