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

#include "icinfl/baselines.h"

#include <algorithm>
#include <mutex>
#include <set>

#include <fmt/format.h>

#include "icinfl/error.h"
#include "icinfl/stats.h"
#include "parallel.h"

namespace icinfl {

std::vector<ExampleId> MethodRanking::top(std::size_t k) const {
  if (k > ordered_ids.size()) {
    throw ConfigError(fmt::format("cannot take {} ids from a ranking of {}", k, ordered_ids.size()));
  }
  return {ordered_ids.begin(), ordered_ids.begin() + static_cast<std::ptrdiff_t>(k)};
}

MethodRanking make_ranking(std::string method, std::map<ExampleId, double> scores, Sign sign,
                           bool higher_is_better) {
  MethodRanking r;
  r.method = std::move(method);
  r.sign = sign;
  const bool descending = (sign == Sign::kPositive) == higher_is_better;
  r.ordered_ids = rank_by_score(scores, descending ? Sign::kPositive : Sign::kNegative);
  r.scores = std::move(scores);
  return r;
}

std::vector<ExampleId> random_selection(std::span<const Example> train, std::size_t k, Rng& rng) {
  return sample_label_balanced(train, k, rng);
}

std::vector<ExampleId> best_observed_set(const RunDataset& run, Sign sign) {
  if (run.records.empty()) throw DataError("run has no records");
  std::size_t best = 0;
  for (std::size_t i = 1; i < run.records.size(); ++i) {
    const double m = run.records[i].metric;
    const double b = run.records[best].metric;
    if (sign == Sign::kPositive ? m > b : m < b) best = i;
  }
  return run.records[best].subset_ids;
}

MethodRanking oneshot_ranking(const SplitIndex& index, Backend& backend, const TaskTemplate& tmpl,
                              Sign sign, const std::map<ExampleId, double>* done,
                              const OneshotSink& sink) {
  const auto& splits = index.splits();
  std::map<ExampleId, double> scores;
  std::int64_t tokens = 0;
  for (const auto& ex : splits.train) {
    if (done != nullptr) {
      if (const auto it = done->find(ex.id); it != done->end()) {
        scores[ex.id] = it->second;
        continue;
      }
    }
    const ExampleId ctx[] = {ex.id};
    const auto r = evaluate_subset(ctx, splits.dev, backend, tmpl, index);
    scores[ex.id] = r.metric();
    tokens += r.tokens;
    if (sink) sink(ex.id, r);
  }
  auto ranking = make_ranking("oneshot", std::move(scores), sign, true);
  ranking.tokens_spent = tokens;
  return ranking;
}

MethodRanking similarity_ranking(const SplitIndex& index, Backend& embedder,
                                 const TaskTemplate& tmpl, Sign sign) {
  const auto& splits = index.splits();
  if (splits.dev.empty()) throw DataError("dev split is empty");
  const int workers = embedder.descriptor().max_in_flight;

  std::vector<std::vector<double>> dev_vecs(splits.dev.size());
  internal::parallel_for(splits.dev.size(), workers, [&](std::size_t i) {
    dev_vecs[i] = embedder.embed(render_example(tmpl, splits.dev[i], false));
  });
  std::vector<double> score(splits.train.size(), 0.0);
  internal::parallel_for(splits.train.size(), workers, [&](std::size_t i) {
    const auto v = embedder.embed(render_example(tmpl, splits.train[i], false));
    double s = 0.0;
    for (const auto& d : dev_vecs) s += cosine_similarity(v, d);
    score[i] = s / static_cast<double>(dev_vecs.size());
  });
  std::map<ExampleId, double> scores;
  for (std::size_t i = 0; i < splits.train.size(); ++i) scores[splits.train[i].id] = score[i];
  return make_ranking("similarity", std::move(scores), sign, true);
}

MethodRanking perplexity_ranking(const SplitIndex& index, Backend& backend,
                                 const TaskTemplate& tmpl, Sign sign) {
  const auto& train = index.splits().train;
  std::vector<double> ppl(train.size(), 0.0);
  std::vector<std::int64_t> spent(train.size(), 0);
  internal::parallel_for(train.size(), backend.descriptor().max_in_flight, [&](std::size_t i) {
    const auto text = render_example(tmpl, train[i], true);
    const auto lps = backend.token_logprobs(text);
    ppl[i] = perplexity_from_logprobs(lps);
    spent[i] = static_cast<std::int64_t>(lps.size()) + 1;
  });
  std::map<ExampleId, double> scores;
  std::int64_t tokens = 0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    scores[train[i].id] = ppl[i];
    tokens += spent[i];
  }
  auto ranking = make_ranking("perplexity", std::move(scores), sign, false);
  ranking.tokens_spent = tokens;
  return ranking;
}

std::vector<std::string> RankAggregate::ordering() const {
  std::vector<std::string> out = methods;
  std::stable_sort(out.begin(), out.end(), [this](const auto& a, const auto& b) {
    const double ra = mean_rank.at(a);
    const double rb = mean_rank.at(b);
    if (ra != rb) return ra < rb;
    return a < b;
  });
  return out;
}

RankAggregate rank_aggregate(const AccuracyTable& table, Sign sign) {
  RankAggregate agg;
  std::set<std::string> methods;
  std::set<std::string> tasks;
  for (const auto& [key, acc] : table) {
    methods.insert(key.first);
    tasks.insert(key.second);
  }
  if (methods.empty()) throw DataError("accuracy table is empty");
  agg.methods.assign(methods.begin(), methods.end());
  agg.tasks.assign(tasks.begin(), tasks.end());
  for (const auto& task : agg.tasks) {
    std::vector<double> key;
    for (const auto& method : agg.methods) {
      const auto it = table.find({method, task});
      if (it == table.end()) {
        throw DataError(fmt::format("missing accuracy for method {} on task {}", method, task));
      }
      key.push_back(sign == Sign::kPositive ? -it->second : it->second);
    }
    const auto ranks = stats::average_ranks(key);
    for (std::size_t m = 0; m < agg.methods.size(); ++m) {
      agg.per_task_rank[{agg.methods[m], task}] = ranks[m];
    }
  }
  for (const auto& method : agg.methods) {
    double s = 0.0;
    for (const auto& task : agg.tasks) s += agg.per_task_rank.at({method, task});
    agg.mean_rank[method] = s / static_cast<double>(agg.tasks.size());
  }
  return agg;
}

void write_ranking_csv(std::ostream& out, const MethodRanking& ranking) {
  CsvWriter csv(out);
  csv.row({"method", "sign", "rank", "id", "score"});
  for (std::size_t i = 0; i < ranking.ordered_ids.size(); ++i) {
    const ExampleId id = ranking.ordered_ids[i];
    csv.row({ranking.method, to_string(ranking.sign), std::to_string(i + 1), std::to_string(id),
             format_double(ranking.scores.at(id))});
  }
}

void write_aggregate_csv(std::ostream& out, const AccuracyTable& table,
                         const RankAggregate& aggregate) {
  CsvWriter csv(out);
  std::vector<std::string> header{"method"};
  header.insert(header.end(), aggregate.tasks.begin(), aggregate.tasks.end());
  header.push_back("rank_agg");
  csv.row(header);
  for (const auto& method : aggregate.ordering()) {
    std::vector<std::string> row{method};
    for (const auto& task : aggregate.tasks) row.push_back(format_double(table.at({method, task})));
    row.push_back(format_double(aggregate.mean_rank.at(method)));
    csv.row(row);
  }
}

}  // namespace icinfl
