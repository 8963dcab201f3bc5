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

#ifndef ICINFL_TESTS_FIXTURES_H_
#define ICINFL_TESTS_FIXTURES_H_

#include <string>
#include <vector>

#include <fmt/format.h>

#include "icinfl/corpus.h"
#include "icinfl/synthetic_backend.h"

namespace icinfl::testing {

inline TaskTemplate synthetic_template(int k_max = 64) {
  return TaskTemplate{"synthetic", "Input: {text}\nLabel: {answer}", "\n###\n", k_max};
}

// Binary examples with alternating labels and distinct texts.
inline std::vector<Example> synthetic_examples(std::size_t n) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example ex;
    ex.id = static_cast<ExampleId>(i);
    ex.fields["text"] = fmt::format("item {} tone w{} w{}", i, (i * 7) % 13, (i * 11) % 17);
    ex.choices = {"no", "yes"};
    ex.label_index = static_cast<int>(i % 2);
    out.push_back(std::move(ex));
  }
  return out;
}

inline DatasetSplits synthetic_splits(std::size_t train, std::size_t dev, std::size_t test,
                                      std::uint64_t seed = kDefaultSeed) {
  const auto examples = synthetic_examples(train + dev + test);
  return split_dataset(examples, SplitSizes{train, dev, test}, seed);
}

inline SyntheticOracleConfig oracle_config(const DatasetSplits& splits, double lo, double hi,
                                           std::vector<double> weights, bool noise,
                                           std::uint64_t noise_seed) {
  SyntheticOracleConfig cfg;
  const auto ids = ids_of(splits.train);
  cfg.quality = linear_qualities(ids, lo, hi);
  cfg.position_weights = std::move(weights);
  cfg.base_accuracy = 0.5;
  cfg.noise = noise;
  cfg.noise_seed = noise_seed;
  return cfg;
}

}  // namespace icinfl::testing

#endif  // ICINFL_TESTS_FIXTURES_H_
