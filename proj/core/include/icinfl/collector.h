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

#ifndef ICINFL_COLLECTOR_H_
#define ICINFL_COLLECTOR_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "icinfl/artifact.h"
#include "icinfl/backend.h"
#include "icinfl/corpus.h"

namespace icinfl {

// One prompting run: the subset S_i, the order it was presented in and
// its dev metric f(S_i) = correct / n_dev.
struct SubsetRecord {
  std::vector<ExampleId> subset_ids;  // sorted
  std::vector<ExampleId> ordering;
  double metric = 0.0;
  int correct = 0;
  int n_dev = 0;
  std::int64_t tokens_spent = 0;

  bool operator==(const SubsetRecord&) const = default;
};

// The run dataset D = {(S_i, f(S_i))}.
struct RunDataset {
  std::string task;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<ExampleId> train_ids;
  BackendDescriptor backend;
  Provenance inputs;
  std::vector<SubsetRecord> records;

  std::size_t size() const { return records.size(); }
};

bool operator==(const BackendDescriptor& a, const BackendDescriptor& b);
bool operator==(const RunDataset& a, const RunDataset& b);

struct EvalResult {
  int correct = 0;
  int n = 0;
  std::int64_t tokens = 0;

  double metric() const { return n == 0 ? 0.0 : static_cast<double>(correct) / n; }
};

// Prompts the backend with `ordering` as demonstrations for every query and
// counts argmax hits. Queries fan out up to the backend's max_in_flight.
EvalResult evaluate_subset(std::span<const ExampleId> ordering,
                           std::span<const Example> queries, Backend& backend,
                           const TaskTemplate& tmpl, const SplitIndex& index);

inline constexpr double kCoverageTarget = 30.0;

// Smallest M with M * k / |S| >= coverage.
std::size_t default_subset_count(std::size_t train_size, std::size_t k,
                                 double coverage = kCoverageTarget);
double expected_coverage(std::size_t num_subsets, std::size_t k, std::size_t train_size);

struct CollectOptions {
  std::string task;
  std::size_t k = 0;
  std::size_t num_subsets = 0;
  std::uint64_t seed = kDefaultSeed;
};

struct CollectResult {
  RunDataset run;
  double expected_coverage = 0.0;
  std::vector<std::string> warnings;
};

using RecordSink = std::function<void(const SubsetRecord&)>;

// Draws num_subsets label-balanced k-subsets of the train split and
// evaluates each on the dev split. Record i depends only on (seed, i), so a
// partial run passed as `resume` is continued from its record count and
// yields the same dataset as an uninterrupted collection. `sink` sees each
// new record as it is finalized.
CollectResult collect(const SplitIndex& index, const CollectOptions& options, Backend& backend,
                      const TaskTemplate& tmpl, const RecordSink& sink = {},
                      const RunDataset* resume = nullptr);

// Inclusion counts N_j over the train universe; unsampled ids map to 0.
std::map<ExampleId, std::size_t> coverage(const RunDataset& run);

std::int64_t tokens_spent(const RunDataset& run);

// Longest record prefix whose cumulative token spend stays within budget.
RunDataset truncate_to_budget(const RunDataset& run, std::int64_t token_budget);

// Run files are JSON lines: a header object followed by one record per line.
void write_run_header(std::ostream& out, const RunDataset& run);
void write_run_record(std::ostream& out, const SubsetRecord& record);
void save_run(const std::filesystem::path& path, const RunDataset& run);
RunDataset parse_run(std::istream& in);
RunDataset load_run(const std::filesystem::path& path);

// Append-only run file. A fresh file gets the header; an existing one is
// appended to.
class RunFileWriter {
 public:
  RunFileWriter(const std::filesystem::path& path, const RunDataset& header, bool append);

  void append(const SubsetRecord& record);

 private:
  std::ofstream out_;
};

// Accuracy of one fixed example set under several random orderings.
struct SelectionEvaluation {
  std::vector<ExampleId> query_ids;
  std::size_t k = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<ExampleId>> orderings;
  std::vector<double> accuracies;
  std::int64_t tokens = 0;

  double mean() const;
  double standard_error() const;
};

// One evaluation per entry of `orderings`, labelled with the matching seed.
SelectionEvaluation evaluate_orderings(const std::vector<std::vector<ExampleId>>& orderings,
                                       std::span<const std::uint64_t> seeds,
                                       std::span<const Example> queries, Backend& backend,
                                       const TaskTemplate& tmpl, const SplitIndex& index);

// Shuffles `selected` once per seed and evaluates each ordering.
SelectionEvaluation evaluate_selection(std::span<const ExampleId> selected,
                                       std::span<const Example> queries, Backend& backend,
                                       const TaskTemplate& tmpl, const SplitIndex& index,
                                       std::span<const std::uint64_t> seeds);

}  // namespace icinfl

#endif  // ICINFL_COLLECTOR_H_
