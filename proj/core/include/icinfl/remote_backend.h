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

#ifndef ICINFL_REMOTE_BACKEND_H_
#define ICINFL_REMOTE_BACKEND_H_

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "icinfl/backend.h"

namespace icinfl {

inline constexpr const char* kApiKeyEnv = "ICINFL_API_KEY";
inline constexpr const char* kEndpointEnv = "ICINFL_ENDPOINT";

// Exponential backoff: attempt n (0-based) waits base_delay * factor^(n-1)
// before retrying.
struct RetryPolicy {
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  int max_attempts = 5;

  std::chrono::milliseconds delay_before(int attempt) const;
};

struct RemoteConfig {
  // Base URL such as "http://localhost:8000"; "/v1/completions" and
  // "/v1/embeddings" are appended. A trailing "/v1" is accepted.
  std::string endpoint;
  std::string model;
  std::string api_key;
  std::string embedding_model;
  int token_budget = 2048;
  int max_in_flight = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

// Fills api_key from ICINFL_API_KEY and lets ICINFL_ENDPOINT override the
// endpoint. Throws ConfigError when the key or endpoint is missing.
RemoteConfig resolve_remote_config(RemoteConfig base);

// Token-level echo of a completions request: one logprob per token, empty
// for tokens the server reports without one.
struct EchoResult {
  std::vector<std::optional<double>> token_logprobs;

  int token_count() const { return static_cast<int>(token_logprobs.size()); }
};

// OpenAI-compatible completions client. Continuation likelihoods come from
// echo requests with max_tokens 0: the prompt and prompt+continuation are
// echoed and the trailing token span is summed.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  ~RemoteBackend() override;

  RemoteBackend(const RemoteBackend&) = delete;
  RemoteBackend& operator=(const RemoteBackend&) = delete;

  const BackendDescriptor& descriptor() const override;

  ScoredContinuation score_continuation(const PromptSpec& prompt,
                                        std::size_t choice_index) override;
  std::vector<double> token_logprobs(std::string_view text) override;
  std::vector<double> embed(std::string_view text) override;

  EchoResult echo(const std::string& text);

  // Replaces std::this_thread::sleep_for between retries (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace icinfl

#endif  // ICINFL_REMOTE_BACKEND_H_
