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

#ifndef ICINFL_SYNTHETIC_BACKEND_H_
#define ICINFL_SYNTHETIC_BACKEND_H_

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "icinfl/backend.h"

namespace icinfl {

// Planted-quality oracle. A prompt with demonstrations c_0..c_{k-1} answers
// its query correctly with probability
//   p = clamp(base_accuracy + sum_p position_weights[p] * quality[c_p], 0.01, 0.99).
struct SyntheticOracleConfig {
  std::map<ExampleId, double> quality;
  std::vector<double> position_weights;
  double base_accuracy = 0.5;
  std::uint64_t noise_seed = 0;
  // With noise off the per-query uniform draw depends only on
  // (noise_seed, query), so accuracy is a deterministic function of p.
  bool noise = true;
};

inline constexpr double kMinCorrectProbability = 0.01;
inline constexpr double kMaxCorrectProbability = 0.99;

double oracle_correct_probability(const PromptSpec& prompt, const SyntheticOracleConfig& cfg);

// Uniform draw compared against p. Identical (cfg, prompt) pairs always
// produce the same value.
double oracle_uniform(const PromptSpec& prompt, const SyntheticOracleConfig& cfg);

// Returns gold_label when the oracle answers correctly, otherwise a
// deterministic wrong choice.
std::size_t synthetic_oracle_classify(const PromptSpec& prompt,
                                      const SyntheticOracleConfig& cfg, int gold_label);

// Qualities spaced evenly over [lo, hi] and assigned in ascending id order.
std::map<ExampleId, double> linear_qualities(std::span<const ExampleId> ids, double lo,
                                             double hi);

class SyntheticBackend final : public Backend {
 public:
  SyntheticBackend(SyntheticOracleConfig cfg, const DatasetSplits& splits,
                   BackendDescriptor descriptor = default_descriptor());

  static BackendDescriptor default_descriptor();

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  const SyntheticOracleConfig& config() const { return cfg_; }

  ScoredContinuation score_continuation(const PromptSpec& prompt,
                                        std::size_t choice_index) override;
  std::vector<ScoredContinuation> score_all(const PromptSpec& prompt) override;
  std::vector<double> token_logprobs(std::string_view text) override;
  std::vector<double> embed(std::string_view text) override;

  int gold_label(ExampleId query) const;

  static constexpr std::size_t kEmbeddingDim = 256;

 private:
  ScoredContinuation score_with_choice(const PromptSpec& prompt, std::size_t choice_index,
                                       std::size_t predicted, int context_tokens) const;

  SyntheticOracleConfig cfg_;
  BackendDescriptor descriptor_;
  std::unordered_map<ExampleId, int> gold_;
};

}  // namespace icinfl

#endif  // ICINFL_SYNTHETIC_BACKEND_H_
