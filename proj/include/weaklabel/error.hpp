// Copyright 2026 The weaklabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace weaklabel {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke an operation's precondition (too few hypotheses, mixed unit kinds, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A record, event stream or configuration violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A ratio was requested over an empty denominator (empty reference, zero baseline).
class UndefinedRateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A replay generator has no transcript for the requested interval.
class GeneratorMiss : public Error {
 public:
  using Error::Error;
};

/// A remote generator failed after exhausting its retries.
class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace weaklabel
