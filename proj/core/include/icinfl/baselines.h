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

#ifndef ICINFL_BASELINES_H_
#define ICINFL_BASELINES_H_

#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "icinfl/collector.h"
#include "icinfl/influence.h"

namespace icinfl {

// A total order over the train ids under one selection criterion, best
// first for the requested sign.
struct MethodRanking {
  std::string method;
  std::vector<ExampleId> ordered_ids;
  std::map<ExampleId, double> scores;
  Sign sign = Sign::kPositive;
  std::int64_t tokens_spent = 0;

  std::vector<ExampleId> top(std::size_t k) const;
};

// Orders ids by score. `higher_is_better` states which direction the
// criterion favours under the positive sign.
MethodRanking make_ranking(std::string method, std::map<ExampleId, double> scores, Sign sign,
                           bool higher_is_better);

std::vector<ExampleId> random_selection(std::span<const Example> train, std::size_t k, Rng& rng);

// Ids of the highest (positive) or lowest (negative) metric record; the
// earliest record wins ties.
std::vector<ExampleId> best_observed_set(const RunDataset& run, Sign sign);

using OneshotSink = std::function<void(ExampleId, const EvalResult&)>;

// Dev accuracy of every train example used alone as a 1-shot prompt. Ids
// already present in `done` are not re-evaluated.
MethodRanking oneshot_ranking(const SplitIndex& index, Backend& backend, const TaskTemplate& tmpl,
                              Sign sign = Sign::kPositive,
                              const std::map<ExampleId, double>* done = nullptr,
                              const OneshotSink& sink = {});

// Mean cosine similarity between each train example and every dev query,
// both rendered without labels.
MethodRanking similarity_ranking(const SplitIndex& index, Backend& embedder,
                                 const TaskTemplate& tmpl, Sign sign = Sign::kPositive);

// Perplexity of each labeled train rendering, separator excluded. Lower
// perplexity ranks first under the positive sign.
MethodRanking perplexity_ranking(const SplitIndex& index, Backend& backend,
                                 const TaskTemplate& tmpl, Sign sign = Sign::kPositive);

using AccuracyTable = std::map<std::pair<std::string, std::string>, double>;  // (method, task)

struct RankAggregate {
  std::vector<std::string> methods;
  std::vector<std::string> tasks;
  std::map<std::pair<std::string, std::string>, double> per_task_rank;
  std::map<std::string, double> mean_rank;

  // Methods by ascending mean rank, ties by name.
  std::vector<std::string> ordering() const;
};

// Rank 1 is the highest accuracy under kPositive and the lowest under
// kNegative. Tied accuracies share their mean rank.
RankAggregate rank_aggregate(const AccuracyTable& table, Sign sign);

void write_ranking_csv(std::ostream& out, const MethodRanking& ranking);

// One row per method: its accuracy on each task followed by its mean rank.
void write_aggregate_csv(std::ostream& out, const AccuracyTable& table,
                         const RankAggregate& aggregate);

}  // namespace icinfl

#endif  // ICINFL_BASELINES_H_
