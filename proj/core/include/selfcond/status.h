/* Copyright 2026 The selfcond Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SELFCOND_STATUS_H_
#define SELFCOND_STATUS_H_

#include <stdexcept>
#include <string>

namespace selfcond {

// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  kInvalidInput,
  kInvalidConfig,
  kSizeLimit,
  kInfeasible,
  kNumeric,
  kData,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what)
      : Error(ErrorKind::kInvalidInput, what) {}
};

class InvalidConfigError : public Error {
 public:
  explicit InvalidConfigError(const std::string& what)
      : Error(ErrorKind::kInvalidConfig, what) {}
};

// Raised by the enumeration oracles when K^T exceeds their guard.
class SizeLimitError : public Error {
 public:
  explicit SizeLimitError(const std::string& what)
      : Error(ErrorKind::kSizeLimit, what) {}
};

// A label sequence has no CTC alignment within the available frames.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

// Missing or malformed files.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

}  // namespace selfcond

#endif  // SELFCOND_STATUS_H_
