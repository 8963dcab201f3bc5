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

#include "icinfl/scaling.h"

#include <algorithm>
#include <optional>

#include <fmt/format.h>

#include "icinfl/baselines.h"
#include "icinfl/datamodel.h"
#include "icinfl/error.h"
#include "icinfl/influence.h"

namespace icinfl {

std::string to_string(SweepAxis axis) { return axis == SweepAxis::kTokens ? "tokens" : "shots"; }

std::vector<std::string> sweep_method_names() {
  return {"influence", "datamodel", "best_set", "oneshot", "random"};
}

namespace {

void check_methods(const std::vector<std::string>& methods) {
  if (methods.empty()) throw ConfigError("no sweep methods configured");
  const auto known = sweep_method_names();
  for (const auto& m : methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw ConfigError(fmt::format("unknown sweep method '{}'", m));
    }
  }
}

bool wants(const std::vector<std::string>& methods, std::string_view name) {
  return std::find(methods.begin(), methods.end(), name) != methods.end();
}

struct OneshotCosts {
  std::vector<ExampleId> ids;  // train order
  std::vector<double> accuracy;
  std::vector<std::int64_t> tokens;
};

OneshotCosts oneshot_costs(const SplitIndex& index, Backend& backend, const TaskTemplate& tmpl) {
  OneshotCosts c;
  oneshot_ranking(index, backend, tmpl, Sign::kPositive, nullptr,
                  [&](ExampleId id, const EvalResult& r) {
                    c.ids.push_back(id);
                    c.accuracy.push_back(r.metric());
                    c.tokens.push_back(r.tokens);
                  });
  return c;
}

// Ids the one-shot baseline could score within `budget`; nullopt if fewer than k.
std::optional<std::vector<ExampleId>> oneshot_top(const OneshotCosts& c, std::int64_t budget,
                                                  std::size_t k) {
  std::map<ExampleId, double> scores;
  std::int64_t spent = 0;
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    if (spent + c.tokens[i] > budget) break;
    spent += c.tokens[i];
    scores[c.ids[i]] = c.accuracy[i];
  }
  if (scores.size() < k) return std::nullopt;
  auto ranked = rank_by_score(scores, Sign::kPositive);
  ranked.resize(k);
  return ranked;
}

MethodPoint evaluate_point(std::span<const ExampleId> selected, std::span<const Example> queries,
                           Backend& backend, const TaskTemplate& tmpl, const SplitIndex& index,
                           std::span<const std::uint64_t> seeds) {
  const auto ev = evaluate_selection(selected, queries, backend, tmpl, index, seeds);
  return {ev.mean(), ev.standard_error()};
}

MethodPoint evaluate_random(std::size_t k, std::span<const Example> queries, Backend& backend,
                            const TaskTemplate& tmpl, const SplitIndex& index,
                            std::span<const std::uint64_t> seeds) {
  std::vector<std::vector<ExampleId>> orderings;
  for (std::uint64_t seed : seeds) {
    Rng rng(hash_words({seed, hash_string("random")}));
    orderings.push_back(random_selection(index.splits().train, k, rng));
  }
  const auto ev = evaluate_orderings(orderings, seeds, queries, backend, tmpl, index);
  return {ev.mean(), ev.standard_error()};
}

}  // namespace

SweepResult budget_sweep(const RunDataset& run, std::span<const std::int64_t> budgets,
                         std::span<const Example> queries, const SplitIndex& index,
                         Backend& backend, const TaskTemplate& tmpl, const SweepOptions& options) {
  check_methods(options.methods);
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (budgets[i] <= budgets[i - 1]) throw ConfigError("budgets must be strictly increasing");
  }
  SweepResult result;
  result.axis = SweepAxis::kTokens;
  result.methods = options.methods;
  const std::size_t k = run.k;

  std::optional<OneshotCosts> oneshot;
  if (wants(options.methods, "oneshot")) oneshot = oneshot_costs(index, backend, tmpl);
  std::optional<MethodPoint> random_point;
  if (wants(options.methods, "random")) {
    random_point = evaluate_random(k, queries, backend, tmpl, index, options.seeds);
  }

  for (std::int64_t budget : budgets) {
    SweepPoint point;
    point.x = budget;
    const auto prefix = truncate_to_budget(run, budget);
    point.tokens_used = tokens_spent(prefix);
    if (prefix.records.size() < 2) {
      point.available = false;
      result.points.push_back(std::move(point));
      continue;
    }
    std::map<std::string, std::vector<ExampleId>> selections;
    if (wants(options.methods, "influence")) {
      const auto report = influence_scores(prefix);
      if (report.scores.size() < k) {
        point.available = false;
      } else {
        selections["influence"] = select_examples(report, k, Sign::kPositive);
      }
    }
    if (wants(options.methods, "datamodel")) {
      const auto fit = fit_datamodel(prefix, options.lambda, 0.0);
      selections["datamodel"] = datamodel_select(fit.weights, k, Sign::kPositive);
    }
    if (wants(options.methods, "best_set")) {
      selections["best_set"] = best_observed_set(prefix, Sign::kPositive);
    }
    if (oneshot) {
      auto top = oneshot_top(*oneshot, budget, k);
      if (!top) {
        point.available = false;
      } else {
        selections["oneshot"] = std::move(*top);
      }
    }
    if (!point.available) {
      result.points.push_back(std::move(point));
      continue;
    }
    for (const auto& method : options.methods) {
      if (method == "random") {
        point.methods[method] = *random_point;
      } else {
        point.methods[method] = evaluate_point(selections.at(method), queries, backend, tmpl,
                                               index, options.seeds);
      }
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

SweepResult shot_sweep(const RunDataset& run, std::span<const std::size_t> ks,
                       std::span<const Example> queries, const SplitIndex& index,
                       Backend& backend, const TaskTemplate& tmpl, const SweepOptions& options) {
  check_methods(options.methods);
  if (wants(options.methods, "best_set")) {
    throw ConfigError("best_set has a fixed size and cannot be swept over k");
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == 0) throw ConfigError("k must be positive");
    if (i > 0 && ks[i] <= ks[i - 1]) throw ConfigError("k values must be strictly increasing");
    if (ks[i] > static_cast<std::size_t>(tmpl.k_max)) {
      throw ConfigError(fmt::format("k={} exceeds k_max={}", ks[i], tmpl.k_max));
    }
  }
  SweepResult result;
  result.axis = SweepAxis::kShots;
  result.methods = options.methods;

  std::map<std::string, std::vector<ExampleId>> rankings;
  if (wants(options.methods, "influence")) {
    rankings["influence"] = rank_by_score(influence_scores(run).scores, Sign::kPositive);
  }
  if (wants(options.methods, "datamodel")) {
    rankings["datamodel"] =
        rank_by_score(fit_datamodel(run, options.lambda, 0.0).weights.theta, Sign::kPositive);
  }
  if (wants(options.methods, "oneshot")) {
    rankings["oneshot"] = oneshot_ranking(index, backend, tmpl).ordered_ids;
  }

  for (std::size_t k : ks) {
    SweepPoint point;
    point.x = static_cast<std::int64_t>(k);
    for (const auto& method : options.methods) {
      if (method == "random") {
        point.methods[method] = evaluate_random(k, queries, backend, tmpl, index, options.seeds);
        continue;
      }
      const auto& ranked = rankings.at(method);
      if (ranked.size() < k) {
        throw DataError(fmt::format("{} ranks only {} ids, fewer than k={}", method,
                                    ranked.size(), k));
      }
      const std::vector<ExampleId> top(ranked.begin(),
                                       ranked.begin() + static_cast<std::ptrdiff_t>(k));
      point.methods[method] = evaluate_point(top, queries, backend, tmpl, index, options.seeds);
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  CsvWriter csv(out);
  csv.row({to_string(result.axis), "method", "mean", "stderr"});
  for (const auto& point : result.points) {
    if (!point.available) continue;
    for (const auto& method : result.methods) {
      const auto& mp = point.methods.at(method);
      csv.row({std::to_string(point.x), method, format_double(mp.mean),
               format_double(mp.stderr_mean)});
    }
  }
}

}  // namespace icinfl
