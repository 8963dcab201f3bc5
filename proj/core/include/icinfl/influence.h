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

#ifndef ICINFL_INFLUENCE_H_
#define ICINFL_INFLUENCE_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "icinfl/collector.h"

namespace icinfl {

// Per-example in-context influence: mean metric of the records that include
// the example minus the mean of those that omit it.
struct InfluenceReport {
  std::map<ExampleId, double> scores;
  std::map<ExampleId, std::size_t> n_included;
  std::size_t m_total = 0;
  // Ids sampled in no record or in every record; their score is undefined.
  std::vector<ExampleId> undefined_ids;
  std::vector<std::string> warnings;

  std::string task;
  BackendDescriptor backend;
  Provenance inputs;
};

// One streaming pass over the records. Requires at least two records.
InfluenceReport influence_scores(const RunDataset& run);

enum class Sign { kPositive, kNegative };
std::string to_string(Sign sign);
Sign sign_from_string(std::string_view name);

// All scored ids ordered by score, descending for kPositive and ascending
// for kNegative; ties go to the smaller id.
std::vector<ExampleId> rank_by_score(const std::map<ExampleId, double>& scores, Sign sign);

std::vector<ExampleId> select_examples(const InfluenceReport& report, std::size_t k, Sign sign);

// Lowest-influence bin first.
struct PercentileBins {
  std::vector<std::vector<ExampleId>> bins;
  std::size_t n_bins() const { return bins.size(); }
};

inline constexpr std::size_t kDefaultBins = 5;

// Ids sorted ascending by (score, id) and cut into contiguous groups; the
// remainder goes to the lowest bins.
PercentileBins percentile_bins(const InfluenceReport& report, std::size_t n_bins = kDefaultBins);

// For each bin, draws k ids per seed from the bin and evaluates that prompt on
// the queries.
std::vector<SelectionEvaluation> evaluate_bins(const PercentileBins& bins, std::size_t k,
                                               std::span<const Example> queries,
                                               Backend& backend, const TaskTemplate& tmpl,
                                               const SplitIndex& index,
                                               std::span<const std::uint64_t> seeds);

// mean(top) - mean(bottom), in accuracy points.
double influence_gap(const SelectionEvaluation& top, const SelectionEvaluation& bottom);

enum class BinEnd { kTop, kBottom };

struct Overlap {
  std::size_t intersection = 0;
  std::size_t union_size = 0;
  std::size_t per_report = 0;

  double fraction() const {
    return union_size == 0 ? 0.0 : static_cast<double>(intersection) / union_size;
  }
};

// Agreement of the top (or bottom) `frac` of each report's ranking. All
// reports must cover the same id universe.
Overlap overlap_analysis(std::span<const InfluenceReport> reports, BinEnd end,
                         double frac = 0.2);

// Line-delimited JSON: a header line then one {id, score, n} row per id.
// Undefined ids carry a null score.
void write_report(std::ostream& out, const InfluenceReport& report);
void save_report(const std::filesystem::path& path, const InfluenceReport& report);
InfluenceReport parse_report(std::istream& in);
InfluenceReport load_report(const std::filesystem::path& path);

void write_scores_csv(std::ostream& out, const InfluenceReport& report);

}  // namespace icinfl

#endif  // ICINFL_INFLUENCE_H_
