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

#include "icinfl/remote_backend.h"

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <semaphore>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "httplib.h"
#include "icinfl/error.h"
#include "icinfl/rng.h"
#include "json.hpp"

namespace icinfl {

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  if (attempt <= 0) return std::chrono::milliseconds{0};
  const double scale = std::pow(factor, attempt - 1);
  return std::chrono::milliseconds{
      static_cast<std::chrono::milliseconds::rep>(static_cast<double>(base_delay.count()) * scale)};
}

RemoteConfig resolve_remote_config(RemoteConfig base) {
  if (const char* endpoint = std::getenv(kEndpointEnv); endpoint != nullptr && *endpoint) {
    base.endpoint = endpoint;
  }
  if (base.api_key.empty()) {
    const char* key = std::getenv(kApiKeyEnv);
    if (key == nullptr || *key == '\0') {
      throw ConfigError(fmt::format("remote backend requires the {} environment variable",
                                    kApiKeyEnv));
    }
    base.api_key = key;
  }
  if (base.endpoint.empty()) throw ConfigError("remote backend requires an endpoint URL");
  if (base.model.empty()) throw ConfigError("remote backend requires a model name");
  return base;
}

struct RemoteBackend::Impl {
  explicit Impl(RemoteConfig cfg)
      : config(std::move(cfg)), in_flight(config.max_in_flight) {
    const auto scheme = config.endpoint.find("://");
    const auto path_start =
        config.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) {
      host = config.endpoint;
    } else {
      host = config.endpoint.substr(0, path_start);
      prefix = config.endpoint.substr(path_start);
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    if (prefix.size() >= 3 && prefix.compare(prefix.size() - 3, 3, "/v1") == 0) {
      prefix.resize(prefix.size() - 3);
    }
    descriptor = BackendDescriptor{BackendKind::kRemote, config.model, config.token_budget,
                                   config.max_in_flight};
    sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }

  nlohmann::json post(const std::string& route, const nlohmann::json& body) {
    const std::string path = prefix + route;
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt < config.retry.max_attempts; ++attempt) {
      if (attempt > 0) sleeper(config.retry.delay_before(attempt));
      httplib::Result res{nullptr, httplib::Error::Unknown};
      {
        in_flight.acquire();
        struct Release {
          std::counting_semaphore<>& s;
          ~Release() { s.release(); }
        } release{in_flight};
        httplib::Client client(host);
        client.set_connection_timeout(config.timeout);
        client.set_read_timeout(config.timeout);
        client.set_write_timeout(config.timeout);
        client.set_bearer_token_auth(config.api_key);
        res = client.Post(path, payload, "application/json");
      }
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 200 && res->status < 300) {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
          throw BackendError(std::string("malformed response: ") + e.what(), false);
        }
      }
      last_error = fmt::format("HTTP {} from {}", res->status, path);
      if (res->status != 429 && res->status < 500) throw BackendError(last_error, false);
    }
    throw BackendError(
        fmt::format("{} after {} attempts", last_error, config.retry.max_attempts), true);
  }

  EchoResult echo(const std::string& text) {
    nlohmann::json body = {{"model", config.model}, {"prompt", text}, {"max_tokens", 0},
                           {"echo", true},          {"logprobs", 1}};
    const auto response = post("/v1/completions", body);
    EchoResult out;
    try {
      const auto& logprobs = response.at("choices").at(0).at("logprobs").at("token_logprobs");
      for (const auto& lp : logprobs) {
        if (lp.is_null()) {
          out.token_logprobs.emplace_back(std::nullopt);
        } else {
          out.token_logprobs.emplace_back(lp.get<double>());
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("response lacks per-token logprobs: ") + e.what(), false);
    }
    return out;
  }

  int prompt_tokens(const std::string& text) {
    const auto key = hash_string(text);
    {
      std::lock_guard lock(cache_mu);
      if (const auto it = prompt_token_cache.find(key); it != prompt_token_cache.end()) {
        return it->second;
      }
    }
    const int n = echo(text).token_count();
    std::lock_guard lock(cache_mu);
    prompt_token_cache.emplace(key, n);
    return n;
  }

  RemoteConfig config;
  BackendDescriptor descriptor;
  std::string host;
  std::string prefix;
  std::counting_semaphore<> in_flight;
  std::function<void(std::chrono::milliseconds)> sleeper;
  std::mutex cache_mu;
  std::unordered_map<std::uint64_t, int> prompt_token_cache;
};

RemoteBackend::RemoteBackend(RemoteConfig config) {
  if (config.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (config.token_budget <= 0) throw ConfigError("token_budget must be positive");
  if (config.retry.max_attempts < 1) throw ConfigError("retry max_attempts must be >= 1");
  if (config.api_key.empty()) {
    throw ConfigError(fmt::format("remote backend requires the {} environment variable",
                                  kApiKeyEnv));
  }
  impl_ = std::make_unique<Impl>(std::move(config));
}

RemoteBackend::~RemoteBackend() = default;

const BackendDescriptor& RemoteBackend::descriptor() const { return impl_->descriptor; }

void RemoteBackend::set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
  impl_->sleeper = std::move(sleeper);
}

EchoResult RemoteBackend::echo(const std::string& text) { return impl_->echo(text); }

ScoredContinuation RemoteBackend::score_continuation(const PromptSpec& prompt,
                                                     std::size_t choice_index) {
  if (choice_index >= prompt.continuations.size()) {
    throw DataError(fmt::format("choice index {} out of range", choice_index));
  }
  const int budget = impl_->config.token_budget;
  const int context_tokens = impl_->prompt_tokens(prompt.text);
  if (context_tokens >= budget) {
    throw OverflowError(fmt::format("prompt has {} tokens, budget is {}", context_tokens, budget),
                        context_tokens, budget);
  }
  const auto full = impl_->echo(prompt.text + prompt.continuations[choice_index]);
  if (full.token_count() > budget) {
    throw OverflowError(
        fmt::format("prompt and continuation need {} tokens, budget is {}", full.token_count(),
                    budget),
        full.token_count(), budget);
  }
  const int continuation_tokens = full.token_count() - context_tokens;
  if (continuation_tokens < 1) {
    throw BackendError("continuation produced no tokens beyond the prompt", false);
  }
  ScoredContinuation s;
  s.continuation_index = choice_index;
  s.token_count = continuation_tokens;
  s.context_token_count = context_tokens;
  for (int i = context_tokens; i < full.token_count(); ++i) {
    const auto& lp = full.token_logprobs[static_cast<std::size_t>(i)];
    if (!lp) throw BackendError("continuation token without a logprob", false);
    s.logprob_sum += *lp;
  }
  return s;
}

std::vector<double> RemoteBackend::token_logprobs(std::string_view text) {
  const auto result = impl_->echo(std::string(text));
  std::vector<double> out;
  for (const auto& lp : result.token_logprobs) {
    if (lp) out.push_back(*lp);
  }
  return out;
}

std::vector<double> RemoteBackend::embed(std::string_view text) {
  if (text.empty()) throw DataError("cannot embed empty text");
  const auto& cfg = impl_->config;
  nlohmann::json body = {{"model", cfg.embedding_model.empty() ? cfg.model : cfg.embedding_model},
                         {"input", std::string(text)}};
  const auto response = impl_->post("/v1/embeddings", body);
  std::vector<double> v;
  try {
    v = response.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed embedding response: ") + e.what(), false);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) throw BackendError("server returned a zero embedding", false);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace icinfl
