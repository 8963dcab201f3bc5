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

#ifndef ICINFL_SCALING_H_
#define ICINFL_SCALING_H_

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "icinfl/collector.h"

namespace icinfl {

enum class SweepAxis { kTokens, kShots };
std::string to_string(SweepAxis axis);

// Selection methods a sweep can compare: "influence", "datamodel",
// "best_set", "oneshot", "random".
std::vector<std::string> sweep_method_names();

struct MethodPoint {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

struct SweepPoint {
  std::int64_t x = 0;
  // False when the budget buys too few records to score every method.
  bool available = true;
  std::int64_t tokens_used = 0;
  std::map<std::string, MethodPoint> methods;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kTokens;
  std::vector<std::string> methods;
  std::vector<SweepPoint> points;
};

struct SweepOptions {
  std::vector<std::string> methods{"influence", "datamodel", "best_set", "oneshot", "random"};
  std::vector<std::uint64_t> seeds = default_evaluation_seeds();
  double lambda = 1e-4;
};

// For each budget, truncates `run` to the records affordable within it,
// re-derives each method's selection of size run.k from that prefix and
// evaluates it on `queries` over the seeds. One-shot scores are likewise
// limited to the train examples whose evaluation fits in the budget.
SweepResult budget_sweep(const RunDataset& run, std::span<const std::int64_t> budgets,
                         std::span<const Example> queries, const SplitIndex& index,
                         Backend& backend, const TaskTemplate& tmpl, const SweepOptions& options);

// Influences estimated once from `run` (collected at a large k), then the
// top-k prefix for each k in `ks` is evaluated over the seeds. best_set is
// not defined across k and is rejected.
SweepResult shot_sweep(const RunDataset& run, std::span<const std::size_t> ks,
                       std::span<const Example> queries, const SplitIndex& index,
                       Backend& backend, const TaskTemplate& tmpl, const SweepOptions& options);

// Columns x, method, mean, stderr. Unavailable points are skipped.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace icinfl

#endif  // ICINFL_SCALING_H_
