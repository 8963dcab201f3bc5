/*
 * Copyright 2026 The icinfl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ICINFL_ERROR_H_
#define ICINFL_ERROR_H_

#include <stdexcept>
#include <string>

namespace icinfl {

// Base of every error thrown by the library. `kind()` is a stable,
// machine-readable tag used by the CLI error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// Invalid configuration or arguments, detected before any work starts.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

// Malformed or inconsistent input data (datasets, artifacts, ids).
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error("data", message) {}
};

// Model backend failure. Retryable errors are transport-level and may
// succeed on a later attempt.
class BackendError : public Error {
 public:
  BackendError(const std::string& message, bool retryable)
      : Error("backend", message), retryable_(retryable) {}

  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

// Prompt plus continuation does not fit the backend token budget.
class OverflowError : public Error {
 public:
  OverflowError(const std::string& message, int tokens, int budget)
      : Error("overflow", message), tokens_(tokens), budget_(budget) {}

  int tokens() const { return tokens_; }
  int budget() const { return budget_; }

 private:
  int tokens_;
  int budget_;
};

}  // namespace icinfl

#endif  // ICINFL_ERROR_H_
