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

#include "icinfl/positional.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "icinfl/error.h"
#include "icinfl/stats.h"

namespace icinfl {

std::vector<std::vector<ExampleId>> partition_groups(std::span<const ExampleId> pool,
                                                     std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ConfigError("need at least one group");
  if (pool.size() < k) {
    throw ConfigError(fmt::format("pool of {} cannot fill {} groups", pool.size(), k));
  }
  std::vector<ExampleId> ids(pool.begin(), pool.end());
  Rng rng(hash_words({seed, hash_string("groups")}));
  rng.shuffle(ids);
  std::vector<std::vector<ExampleId>> groups(k);
  const std::size_t base = ids.size() / k;
  const std::size_t extra = ids.size() % k;
  std::size_t pos = 0;
  for (std::size_t g = 0; g < k; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    groups[g].assign(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                     ids.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(groups[g].begin(), groups[g].end());
    pos += size;
  }
  return groups;
}

PositionalRun run_position_study(const std::vector<std::vector<ExampleId>>& groups,
                                 std::size_t num_assignments, const SplitIndex& index,
                                 Backend& backend, const TaskTemplate& tmpl,
                                 std::uint64_t seed) {
  const std::size_t k = groups.size();
  if (k == 0) throw ConfigError("need at least one group");
  if (k > kMaxPositions) {
    throw ConfigError(
        fmt::format("permutation budget exceeded: {} positions (at most {})", k, kMaxPositions));
  }
  if (k > static_cast<std::size_t>(tmpl.k_max)) {
    throw ConfigError(fmt::format("k={} exceeds k_max={}", k, tmpl.k_max));
  }
  if (num_assignments == 0) throw ConfigError("need at least one assignment");
  std::set<ExampleId> seen;
  for (const auto& g : groups) {
    if (g.empty()) throw ConfigError("empty group");
    for (ExampleId id : g) {
      if (!seen.insert(id).second) throw ConfigError(fmt::format("id {} is in two groups", id));
      if (index.role(id) != SplitRole::kTrain) {
        throw DataError(fmt::format("id {} is not a train example", id));
      }
    }
  }

  PositionalRun run;
  run.groups = groups;
  run.k = k;
  const auto& dev = index.splits().dev;
  for (std::size_t a = 0; a < num_assignments; ++a) {
    Rng rng(hash_words({seed, static_cast<std::uint64_t>(a)}));
    std::vector<ExampleId> assignment;
    for (const auto& g : groups) assignment.push_back(g[rng.below(g.size())]);
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t perm_index = 0;
    do {
      PositionalRecord rec;
      rec.assignment = assignment;
      rec.permutation_index = perm_index++;
      for (std::size_t p = 0; p < k; ++p) rec.ordering.push_back(assignment[perm[p]]);
      rec.metric = evaluate_subset(rec.ordering, dev, backend, tmpl, index).metric();
      run.records.push_back(std::move(rec));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return run;
}

PositionalInfluence positional_influence(const PositionalRun& run, PositionalContrast contrast) {
  PositionalInfluence out;
  const std::size_t k = run.k;
  if (run.records.empty()) throw DataError("position study has no records");

  double total = 0.0;
  for (const auto& rec : run.records) {
    if (rec.ordering.size() != k) throw DataError("record ordering length differs from k");
    total += rec.metric;
  }
  const std::size_t m = run.records.size();

  // Sums over records holding id at p, and over records holding id anywhere.
  std::map<std::pair<ExampleId, std::size_t>, std::pair<double, std::size_t>> at;
  std::map<ExampleId, std::pair<double, std::size_t>> any;
  for (const auto& rec : run.records) {
    for (std::size_t p = 0; p < k; ++p) {
      auto& a = at[{rec.ordering[p], p}];
      a.first += rec.metric;
      ++a.second;
    }
    std::set<ExampleId> members(rec.ordering.begin(), rec.ordering.end());
    for (ExampleId id : members) {
      auto& a = any[id];
      a.first += rec.metric;
      ++a.second;
    }
  }

  std::vector<std::vector<double>> by_position(k);
  std::size_t omitted = 0;
  for (const auto& [id, held] : any) {
    for (std::size_t p = 0; p < k; ++p) {
      const auto it = at.find({id, p});
      if (it == at.end()) {
        ++omitted;
        continue;
      }
      const auto [in_sum, in_n] = it->second;
      double rest_sum = 0.0;
      std::size_t rest_n = 0;
      if (contrast == PositionalContrast::kAllRecords) {
        rest_sum = total - in_sum;
        rest_n = m - in_n;
      } else {
        rest_sum = held.first - in_sum;
        rest_n = held.second - in_n;
      }
      if (rest_n == 0) {
        ++omitted;
        continue;
      }
      const double v = in_sum / static_cast<double>(in_n) - rest_sum / static_cast<double>(rest_n);
      out.per_pair[{id, p}] = v;
      out.pair_counts[{id, p}] = in_n;
      by_position[p].push_back(v);
    }
  }
  if (omitted > 0) {
    out.warnings.push_back(
        fmt::format("{} (example, position) pair(s) lack observations and were omitted", omitted));
  }

  for (std::size_t p = 0; p < k; ++p) {
    PositionSummary s;
    const auto& v = by_position[p];
    s.n_ids = v.size();
    if (!v.empty()) {
      s.mean = stats::mean(v);
      double abs_sum = 0.0;
      for (double x : v) abs_sum += std::abs(x);
      s.mean_abs = abs_sum / static_cast<double>(v.size());
      s.iqr = stats::interquartile_range(v);
      s.stderr_mean = stats::standard_error(v);
    }
    out.per_position.push_back(s);
  }
  return out;
}

void write_pairs_csv(std::ostream& out, const PositionalInfluence& influence) {
  CsvWriter csv(out);
  csv.row({"id", "position", "influence", "count"});
  for (const auto& [key, v] : influence.per_pair) {
    csv.row({std::to_string(key.first), std::to_string(key.second), format_double(v),
             std::to_string(influence.pair_counts.at(key))});
  }
}

void write_positions_csv(std::ostream& out, const PositionalInfluence& influence) {
  CsvWriter csv(out);
  csv.row({"position", "mean", "mean_abs", "iqr", "stderr", "n_ids"});
  for (std::size_t p = 0; p < influence.per_position.size(); ++p) {
    const auto& s = influence.per_position[p];
    csv.row({std::to_string(p), format_double(s.mean), format_double(s.mean_abs),
             format_double(s.iqr), format_double(s.stderr_mean), std::to_string(s.n_ids)});
  }
}

}  // namespace icinfl
