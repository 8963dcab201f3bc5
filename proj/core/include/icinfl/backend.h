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

#ifndef ICINFL_BACKEND_H_
#define ICINFL_BACKEND_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icinfl/corpus.h"

namespace icinfl {

// Log-likelihood of one continuation, in nats, summed over its tokens.
struct ScoredContinuation {
  std::size_t continuation_index = 0;
  double logprob_sum = 0.0;
  int token_count = 1;
  // Tokens of the prompt the continuation was conditioned on.
  int context_token_count = 0;

  int total_tokens() const { return token_count + context_token_count; }
};

enum class BackendKind { kRemote, kSynthetic };

std::string to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view name);

struct BackendDescriptor {
  BackendKind kind = BackendKind::kSynthetic;
  std::string model_name;
  int token_budget = 2048;
  int max_in_flight = 1;
};

// Model-query interface shared by the remote client and the synthetic
// oracle. Implementations must be safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const BackendDescriptor& descriptor() const = 0;

  // Sum of continuation token log-probabilities conditioned on the full
  // prompt. No length normalization.
  virtual ScoredContinuation score_continuation(const PromptSpec& prompt,
                                                std::size_t choice_index) = 0;

  // Scores every continuation of the prompt, in choice order.
  virtual std::vector<ScoredContinuation> score_all(const PromptSpec& prompt);

  // Least index with the highest log-likelihood.
  std::size_t classify(const PromptSpec& prompt);

  // Per-token log-probabilities of `text` (tokens without a conditional
  // probability, such as the first one, are omitted).
  virtual std::vector<double> token_logprobs(std::string_view text) = 0;

  double perplexity(std::string_view text);

  // Unit-norm sentence embedding.
  virtual std::vector<double> embed(std::string_view text) = 0;
};

std::size_t argmax_choice(std::span<const ScoredContinuation> scores);

// exp(-mean(logprobs)).
double perplexity_from_logprobs(std::span<const double> logprobs);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Whitespace-delimited word count; the synthetic backend's tokenizer.
int count_whitespace_tokens(std::string_view text);

}  // namespace icinfl

#endif  // ICINFL_BACKEND_H_
