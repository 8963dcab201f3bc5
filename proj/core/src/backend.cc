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

#include "icinfl/backend.h"

#include <cmath>
#include <numeric>

#include "icinfl/error.h"

namespace icinfl {

std::string to_string(BackendKind kind) {
  return kind == BackendKind::kRemote ? "remote" : "synthetic";
}

BackendKind backend_kind_from_string(std::string_view name) {
  if (name == "remote") return BackendKind::kRemote;
  if (name == "synthetic") return BackendKind::kSynthetic;
  throw ConfigError("unknown backend kind: " + std::string(name));
}

std::vector<ScoredContinuation> Backend::score_all(const PromptSpec& prompt) {
  std::vector<ScoredContinuation> scores;
  scores.reserve(prompt.continuations.size());
  for (std::size_t i = 0; i < prompt.continuations.size(); ++i) {
    scores.push_back(score_continuation(prompt, i));
  }
  return scores;
}

std::size_t Backend::classify(const PromptSpec& prompt) {
  if (prompt.continuations.size() < 2) {
    throw DataError("classification needs at least 2 choices");
  }
  return argmax_choice(score_all(prompt));
}

double Backend::perplexity(std::string_view text) {
  if (text.empty()) throw DataError("perplexity of empty text");
  return perplexity_from_logprobs(token_logprobs(text));
}

std::size_t argmax_choice(std::span<const ScoredContinuation> scores) {
  if (scores.empty()) throw DataError("argmax over no continuations");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].logprob_sum > scores[best].logprob_sum) best = i;
  }
  return scores[best].continuation_index;
}

double perplexity_from_logprobs(std::span<const double> logprobs) {
  if (logprobs.empty()) throw DataError("perplexity needs at least one scored token");
  const double sum = std::accumulate(logprobs.begin(), logprobs.end(), 0.0);
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("embedding dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

int count_whitespace_tokens(std::string_view text) {
  int count = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

}  // namespace icinfl
