// Copyright 2026 The adasq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADASQ_ERRORS_H_
#define ADASQ_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adasq {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A numeric parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A statistical query produced a value outside [0, 1] on some record.
class QueryRangeError : public Error {
 public:
  QueryRangeError(std::string query_id, std::size_t index, double value);

  const std::string& query_id() const { return query_id_; }
  std::size_t index() const { return index_; }
  double value() const { return value_; }

 private:
  std::string query_id_;
  std::size_t index_;
  double value_;
};

// A mechanism was asked more queries than its budget allows.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// The analyst/mechanism protocol was violated.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Parameters fall outside the regime required by the accuracy guarantee.
class RegimeError : public Error {
 public:
  using Error::Error;
};

// An experiment configuration is malformed or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace adasq

#endif  // ADASQ_ERRORS_H_
