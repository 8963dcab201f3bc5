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

#include "icinfl/synthetic_backend.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "icinfl/error.h"
#include "icinfl/rng.h"

namespace icinfl {
namespace {

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace

double oracle_correct_probability(const PromptSpec& prompt, const SyntheticOracleConfig& cfg) {
  if (prompt.context.size() > cfg.position_weights.size()) {
    throw DataError(fmt::format("oracle has {} position weights but the prompt has {} shots",
                                cfg.position_weights.size(), prompt.context.size()));
  }
  double p = cfg.base_accuracy;
  for (std::size_t pos = 0; pos < prompt.context.size(); ++pos) {
    const auto it = cfg.quality.find(prompt.context[pos]);
    if (it == cfg.quality.end()) {
      throw DataError(fmt::format("unknown example id {}", prompt.context[pos]));
    }
    p += cfg.position_weights[pos] * it->second;
  }
  return std::clamp(p, kMinCorrectProbability, kMaxCorrectProbability);
}

double oracle_uniform(const PromptSpec& prompt, const SyntheticOracleConfig& cfg) {
  std::uint64_t key = hash_words({cfg.noise_seed, static_cast<std::uint64_t>(prompt.query)});
  if (cfg.noise) {
    std::vector<ExampleId> sorted = prompt.context;
    std::sort(sorted.begin(), sorted.end());
    key = hash_combine(key, sorted.size());
    for (ExampleId id : sorted) key = hash_combine(key, static_cast<std::uint64_t>(id));
    key = hash_combine(key, 0x5eedULL);
    for (ExampleId id : prompt.context) key = hash_combine(key, static_cast<std::uint64_t>(id));
  }
  return to_unit_interval(mix64(key));
}

std::size_t synthetic_oracle_classify(const PromptSpec& prompt,
                                      const SyntheticOracleConfig& cfg, int gold_label) {
  const std::size_t n = prompt.continuations.size();
  if (n < 2) throw DataError("classification needs at least 2 choices");
  if (gold_label < 0 || static_cast<std::size_t>(gold_label) >= n) {
    throw DataError(fmt::format("gold label {} out of range", gold_label));
  }
  const double p = oracle_correct_probability(prompt, cfg);
  const double u = oracle_uniform(prompt, cfg);
  if (u < p) return static_cast<std::size_t>(gold_label);
  // Wrong answers pick uniformly among the other choices.
  const auto offset =
      1 + static_cast<std::size_t>(mix64(hash_combine(static_cast<std::uint64_t>(u * 0x1.0p53),
                                                      0xbadULL)) %
                                   (n - 1));
  return (static_cast<std::size_t>(gold_label) + offset) % n;
}

std::map<ExampleId, double> linear_qualities(std::span<const ExampleId> ids, double lo,
                                             double hi) {
  std::vector<ExampleId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  std::map<ExampleId, double> q;
  const std::size_t n = sorted.size();
  for (std::size_t i = 0; i < n; ++i) {
    q[sorted[i]] = n == 1 ? 0.5 * (lo + hi)
                          : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return q;
}

SyntheticBackend::SyntheticBackend(SyntheticOracleConfig cfg, const DatasetSplits& splits,
                                   BackendDescriptor descriptor)
    : cfg_(std::move(cfg)), descriptor_(std::move(descriptor)) {
  descriptor_.kind = BackendKind::kSynthetic;
  if (descriptor_.token_budget <= 0) throw ConfigError("token_budget must be positive");
  if (descriptor_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  for (const auto* part : {&splits.train, &splits.dev, &splits.test}) {
    for (const auto& ex : *part) gold_[ex.id] = ex.label_index;
  }
}

BackendDescriptor SyntheticBackend::default_descriptor() {
  return BackendDescriptor{BackendKind::kSynthetic, "synthetic-oracle", 1 << 20, 1};
}

int SyntheticBackend::gold_label(ExampleId query) const {
  const auto it = gold_.find(query);
  if (it == gold_.end()) throw DataError(fmt::format("unknown example id {}", query));
  return it->second;
}

ScoredContinuation SyntheticBackend::score_with_choice(const PromptSpec& prompt,
                                                       std::size_t choice_index,
                                                       std::size_t predicted,
                                                       int context_tokens) const {
  if (choice_index >= prompt.continuations.size()) {
    throw DataError(fmt::format("choice index {} out of range", choice_index));
  }
  ScoredContinuation s;
  s.continuation_index = choice_index;
  s.token_count = std::max(1, count_whitespace_tokens(prompt.continuations[choice_index]));
  s.context_token_count = context_tokens;
  if (s.total_tokens() > descriptor_.token_budget) {
    throw OverflowError(fmt::format("prompt needs {} tokens, budget is {}", s.total_tokens(),
                                    descriptor_.token_budget),
                        s.total_tokens(), descriptor_.token_budget);
  }
  s.logprob_sum = choice_index == predicted
                      ? -0.5
                      : -(2.0 + 0.25 * static_cast<double>(choice_index));
  return s;
}

ScoredContinuation SyntheticBackend::score_continuation(const PromptSpec& prompt,
                                                        std::size_t choice_index) {
  const auto predicted = synthetic_oracle_classify(prompt, cfg_, gold_label(prompt.query));
  return score_with_choice(prompt, choice_index, predicted,
                           count_whitespace_tokens(prompt.text));
}

std::vector<ScoredContinuation> SyntheticBackend::score_all(const PromptSpec& prompt) {
  const auto predicted = synthetic_oracle_classify(prompt, cfg_, gold_label(prompt.query));
  const int context_tokens = count_whitespace_tokens(prompt.text);
  std::vector<ScoredContinuation> out;
  out.reserve(prompt.continuations.size());
  for (std::size_t i = 0; i < prompt.continuations.size(); ++i) {
    out.push_back(score_with_choice(prompt, i, predicted, context_tokens));
  }
  return out;
}

std::vector<double> SyntheticBackend::token_logprobs(std::string_view text) {
  std::vector<double> out;
  for (const auto& w : words_of(text)) {
    out.push_back(-(0.05 + 4.95 * to_unit_interval(hash_combine(cfg_.noise_seed,
                                                                hash_string(w)))));
  }
  if (out.empty()) throw DataError("text has no tokens");
  return out;
}

std::vector<double> SyntheticBackend::embed(std::string_view text) {
  // Signed feature hashing over lowercased words.
  std::vector<double> v(kEmbeddingDim, 0.0);
  for (auto w : words_of(text)) {
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const std::uint64_t h = hash_string(w);
    v[h % kEmbeddingDim] += (h >> 63) != 0 ? 1.0 : -1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) {
    // Empty text or cancelling hashes.
    if (text.empty()) throw DataError("cannot embed empty text");
    v[hash_string(text) % kEmbeddingDim] = 1.0;
    return v;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace icinfl
