// Copyright 2026 The otafl Authors
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

#ifndef OTAFL_ERROR_HPP_
#define OTAFL_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace otafl {

// Process exit codes shared by every subcommand.
enum class ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kNumerical = 3,
  kIo = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// A parameter broke a documented constraint. `field` is a dotted path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& constraint)
      : Error(ExitCode::kValidation, field + ": " + constraint),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, std::size_t column,
             const std::string& detail)
      : Error(ExitCode::kValidation,
              path + ":" + std::to_string(line) + ":" +
                  std::to_string(column) + ": " + detail),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Stage I produced tau_min > tau_max.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::int64_t tau_min, std::int64_t tau_max)
      : Error(ExitCode::kValidation,
              "infeasible iteration set: tau_min=" + std::to_string(tau_min) +
                  " tau_max=" + std::to_string(tau_max)),
        tau_min_(tau_min),
        tau_max_(tau_max) {}
  std::int64_t tau_min() const noexcept { return tau_min_; }
  std::int64_t tau_max() const noexcept { return tau_max_; }

 private:
  std::int64_t tau_min_;
  std::int64_t tau_max_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ExitCode::kNumerical, what) {}
};

class NonPositiveRadicand : public NumericalError {
 public:
  explicit NonPositiveRadicand(double value)
      : NumericalError("non-positive radicand in idle closed form: " +
                       std::to_string(value)),
        value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

class MaxItersExceeded : public NumericalError {
 public:
  MaxItersExceeded(double lo, double hi)
      : NumericalError("bisection exceeded max iterations, bracket [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        lo_(lo),
        hi_(hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

// No reliable client in a round under the realized divisor.
class EmptyRoundError : public NumericalError {
 public:
  explicit EmptyRoundError(std::uint64_t round)
      : NumericalError("empty round " + std::to_string(round)),
        round_(round) {}
  std::uint64_t round() const noexcept { return round_; }

 private:
  std::uint64_t round_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& detail)
      : Error(ExitCode::kIo, path + ": " + detail), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace otafl

#endif  // OTAFL_ERROR_HPP_
