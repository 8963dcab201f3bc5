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

#include "icinfl/collector.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "icinfl/error.h"
#include "icinfl/stats.h"
#include "json.hpp"
#include "parallel.h"

namespace icinfl {

using nlohmann::json;

bool operator==(const BackendDescriptor& a, const BackendDescriptor& b) {
  return a.kind == b.kind && a.model_name == b.model_name && a.token_budget == b.token_budget &&
         a.max_in_flight == b.max_in_flight;
}

bool operator==(const RunDataset& a, const RunDataset& b) {
  return a.task == b.task && a.k == b.k && a.seed == b.seed && a.train_ids == b.train_ids &&
         a.backend == b.backend && a.inputs == b.inputs && a.records == b.records;
}

EvalResult evaluate_subset(std::span<const ExampleId> ordering,
                           std::span<const Example> queries, Backend& backend,
                           const TaskTemplate& tmpl, const SplitIndex& index) {
  const std::size_t n = queries.size();
  std::vector<char> hit(n, 0);
  std::vector<std::int64_t> spent(n, 0);
  internal::parallel_for(n, backend.descriptor().max_in_flight, [&](std::size_t i) {
    const auto& query = queries[i];
    const auto prompt = build_prompt(tmpl, ordering, query.id, index);
    const auto scores = backend.score_all(prompt);
    for (const auto& s : scores) spent[i] += s.total_tokens();
    hit[i] = argmax_choice(scores) == static_cast<std::size_t>(query.label_index) ? 1 : 0;
  });
  EvalResult r;
  r.n = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.correct += hit[i];
    r.tokens += spent[i];
  }
  return r;
}

std::size_t default_subset_count(std::size_t train_size, std::size_t k, double coverage) {
  if (k == 0) throw ConfigError("k must be positive");
  return static_cast<std::size_t>(
      std::ceil(coverage * static_cast<double>(train_size) / static_cast<double>(k) - 1e-9));
}

double expected_coverage(std::size_t num_subsets, std::size_t k, std::size_t train_size) {
  if (train_size == 0) return 0.0;
  return static_cast<double>(num_subsets) * static_cast<double>(k) /
         static_cast<double>(train_size);
}

namespace {

SubsetRecord make_record(std::vector<ExampleId> ordering, const EvalResult& r) {
  SubsetRecord rec;
  rec.subset_ids = ordering;
  std::sort(rec.subset_ids.begin(), rec.subset_ids.end());
  rec.ordering = std::move(ordering);
  rec.correct = r.correct;
  rec.n_dev = r.n;
  rec.metric = r.metric();
  rec.tokens_spent = r.tokens;
  return rec;
}

}  // namespace

CollectResult collect(const SplitIndex& index, const CollectOptions& options, Backend& backend,
                      const TaskTemplate& tmpl, const RecordSink& sink,
                      const RunDataset* resume) {
  const auto& splits = index.splits();
  if (options.num_subsets == 0) throw ConfigError("M must be positive");
  if (options.k == 0) throw ConfigError("k must be positive");
  if (options.k > static_cast<std::size_t>(tmpl.k_max)) {
    throw ConfigError(fmt::format("k={} exceeds k_max={} for template {}", options.k,
                                  tmpl.k_max, tmpl.name));
  }
  if (options.k > splits.train.size()) {
    throw ConfigError(
        fmt::format("k={} exceeds the train split size {}", options.k, splits.train.size()));
  }
  if (splits.dev.empty()) throw DataError("dev split is empty");

  CollectResult out;
  RunDataset& run = out.run;
  run.task = options.task;
  run.k = options.k;
  run.seed = options.seed;
  run.train_ids = ids_of(splits.train);
  run.backend = backend.descriptor();

  if (resume != nullptr) {
    if (resume->task != run.task || resume->k != run.k || resume->seed != run.seed ||
        resume->train_ids != run.train_ids) {
      throw ConfigError("existing run file was collected with different settings");
    }
    if (resume->records.size() > options.num_subsets) {
      throw ConfigError(fmt::format("existing run already has {} records, more than M={}",
                                    resume->records.size(), options.num_subsets));
    }
    run.inputs = resume->inputs;
    run.records = resume->records;
  }

  out.expected_coverage = expected_coverage(options.num_subsets, options.k, splits.train.size());
  if (out.expected_coverage < kCoverageTarget) {
    out.warnings.push_back(fmt::format(
        "expected coverage {:.2f} is below {} inclusions per example; raise M to at least {}",
        out.expected_coverage, kCoverageTarget,
        default_subset_count(splits.train.size(), options.k)));
  }

  run.records.reserve(options.num_subsets);
  for (std::size_t i = run.records.size(); i < options.num_subsets; ++i) {
    Rng rng(hash_words({options.seed, static_cast<std::uint64_t>(i)}));
    auto ordering = sample_label_balanced(splits.train, options.k, rng);
    const auto result = evaluate_subset(ordering, splits.dev, backend, tmpl, index);
    run.records.push_back(make_record(std::move(ordering), result));
    if (sink) sink(run.records.back());
  }
  return out;
}

std::map<ExampleId, std::size_t> coverage(const RunDataset& run) {
  std::map<ExampleId, std::size_t> counts;
  for (ExampleId id : run.train_ids) counts[id] = 0;
  for (const auto& rec : run.records) {
    for (ExampleId id : rec.subset_ids) ++counts[id];
  }
  return counts;
}

std::int64_t tokens_spent(const RunDataset& run) {
  std::int64_t total = 0;
  for (const auto& rec : run.records) total += rec.tokens_spent;
  return total;
}

RunDataset truncate_to_budget(const RunDataset& run, std::int64_t token_budget) {
  RunDataset out = run;
  out.records.clear();
  std::int64_t total = 0;
  for (const auto& rec : run.records) {
    if (total + rec.tokens_spent > token_budget) break;
    total += rec.tokens_spent;
    out.records.push_back(rec);
  }
  return out;
}

namespace {

json header_json(const RunDataset& run) {
  return json{{"type", "header"},
              {"task", run.task},
              {"k", run.k},
              {"seed", run.seed},
              {"train_ids", run.train_ids},
              {"backend",
               {{"kind", to_string(run.backend.kind)},
                {"model", run.backend.model_name},
                {"token_budget", run.backend.token_budget},
                {"max_in_flight", run.backend.max_in_flight}}},
              {"inputs", run.inputs}};
}

json record_json(const SubsetRecord& rec) {
  return json{{"subset_ids", rec.subset_ids}, {"ordering", rec.ordering},
              {"metric", rec.metric},         {"correct", rec.correct},
              {"n_dev", rec.n_dev},           {"tokens", rec.tokens_spent}};
}

SubsetRecord record_from_json(const json& j, std::size_t k, std::size_t line) {
  SubsetRecord rec;
  rec.subset_ids = j.at("subset_ids").get<std::vector<ExampleId>>();
  rec.ordering = j.at("ordering").get<std::vector<ExampleId>>();
  rec.correct = j.at("correct").get<int>();
  rec.n_dev = j.at("n_dev").get<int>();
  rec.metric = j.at("metric").get<double>();
  rec.tokens_spent = j.at("tokens").get<std::int64_t>();
  auto sorted = rec.ordering;
  std::sort(sorted.begin(), sorted.end());
  if (rec.subset_ids.size() != k || sorted != rec.subset_ids ||
      std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DataError(fmt::format("malformed subset at run line {}", line));
  }
  if (rec.n_dev <= 0 || rec.correct < 0 || rec.correct > rec.n_dev ||
      rec.metric != static_cast<double>(rec.correct) / rec.n_dev) {
    throw DataError(fmt::format("inconsistent metric at run line {}", line));
  }
  return rec;
}

}  // namespace

void write_run_header(std::ostream& out, const RunDataset& run) {
  out << header_json(run).dump() << '\n';
}

void write_run_record(std::ostream& out, const SubsetRecord& record) {
  out << record_json(record).dump() << '\n';
}

void save_run(const std::filesystem::path& path, const RunDataset& run) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_run_header(out, run);
  for (const auto& rec : run.records) write_run_record(out, rec);
  if (!out) throw DataError("write failed for " + path.string());
}

RunDataset parse_run(std::istream& in) {
  RunDataset run;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::set<ExampleId> universe;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      // A crash mid-append can leave a torn final line; anything earlier is corrupt.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw DataError(fmt::format("invalid JSON at run line {}", line_no));
    }
    try {
      if (!have_header) {
        if (j.value("type", "") != "header") {
          throw DataError("run file does not start with a header line");
        }
        run.task = j.at("task").get<std::string>();
        run.k = j.at("k").get<std::size_t>();
        run.seed = j.at("seed").get<std::uint64_t>();
        run.train_ids = j.at("train_ids").get<std::vector<ExampleId>>();
        const auto& b = j.at("backend");
        run.backend.kind = backend_kind_from_string(b.at("kind").get<std::string>());
        run.backend.model_name = b.at("model").get<std::string>();
        run.backend.token_budget = b.at("token_budget").get<int>();
        run.backend.max_in_flight = b.at("max_in_flight").get<int>();
        run.inputs = j.at("inputs").get<Provenance>();
        universe.insert(run.train_ids.begin(), run.train_ids.end());
        have_header = true;
        continue;
      }
      auto rec = record_from_json(j, run.k, line_no);
      for (ExampleId id : rec.subset_ids) {
        if (!universe.contains(id)) {
          throw DataError(fmt::format("id {} at run line {} is not a train id", id, line_no));
        }
      }
      run.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw DataError(fmt::format("malformed run line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw DataError("run file is empty");
  return run;
}

RunDataset load_run(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_run(in);
}

RunFileWriter::RunFileWriter(const std::filesystem::path& path, const RunDataset& header,
                             bool append) {
  if (append) {
    out_.open(path, std::ios::binary | std::ios::app);
  } else {
    out_.open(path, std::ios::binary | std::ios::trunc);
  }
  if (!out_) throw DataError("cannot write " + path.string());
  if (!append) {
    write_run_header(out_, header);
    out_.flush();
  }
}

void RunFileWriter::append(const SubsetRecord& record) {
  write_run_record(out_, record);
  out_.flush();
  if (!out_) throw DataError("run file append failed");
}

double SelectionEvaluation::mean() const { return stats::mean(accuracies); }

double SelectionEvaluation::standard_error() const { return stats::standard_error(accuracies); }

SelectionEvaluation evaluate_orderings(const std::vector<std::vector<ExampleId>>& orderings,
                                       std::span<const std::uint64_t> seeds,
                                       std::span<const Example> queries, Backend& backend,
                                       const TaskTemplate& tmpl, const SplitIndex& index) {
  if (orderings.size() != seeds.size()) {
    throw ConfigError("need exactly one seed per ordering");
  }
  if (queries.empty()) throw DataError("no evaluation queries");
  SelectionEvaluation ev;
  ev.query_ids = ids_of(queries);
  ev.k = orderings.empty() ? 0 : orderings.front().size();
  ev.seeds.assign(seeds.begin(), seeds.end());
  ev.orderings = orderings;
  for (const auto& ordering : orderings) {
    if (ordering.size() != ev.k) throw ConfigError("orderings differ in length");
    const auto r = evaluate_subset(ordering, queries, backend, tmpl, index);
    ev.accuracies.push_back(r.metric());
    ev.tokens += r.tokens;
  }
  return ev;
}

SelectionEvaluation evaluate_selection(std::span<const ExampleId> selected,
                                       std::span<const Example> queries, Backend& backend,
                                       const TaskTemplate& tmpl, const SplitIndex& index,
                                       std::span<const std::uint64_t> seeds) {
  std::vector<std::vector<ExampleId>> orderings;
  orderings.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    std::vector<ExampleId> ordering(selected.begin(), selected.end());
    Rng rng(seed);
    rng.shuffle(ordering);
    orderings.push_back(std::move(ordering));
  }
  return evaluate_orderings(orderings, seeds, queries, backend, tmpl, index);
}

}  // namespace icinfl
