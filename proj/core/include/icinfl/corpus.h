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

#ifndef ICINFL_CORPUS_H_
#define ICINFL_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icinfl/rng.h"

namespace icinfl {

using ExampleId = std::int64_t;

// One labeled task instance. `fields` holds the template slot values,
// `choices` the candidate continuations and `label_index` the gold one.
struct Example {
  ExampleId id = 0;
  std::map<std::string, std::string> fields;
  int label_index = 0;
  std::vector<std::string> choices;

  const std::string& gold() const { return choices.at(label_index); }
};

inline constexpr std::string_view kDefaultSeparator = "\n###\n";
inline constexpr std::string_view kAnswerSlot = "answer";

// Prompt template. `body` uses `{slot}` placeholders and must end with the
// `{answer}` slot, where the continuation is placed.
struct TaskTemplate {
  std::string name;
  std::string body;
  std::string separator{kDefaultSeparator};
  int k_max = 1;

  // Slot names referenced by the body, excluding the answer slot, in order
  // of first appearance.
  std::vector<std::string> slots() const;

  // Throws ConfigError if the template breaks its invariants.
  void validate() const;
};

// Built-in templates: piqa, boolq, rte, wic, wsc, arc_challenge, arc_easy,
// hellaswag, obqa.
std::vector<std::string> builtin_template_names();
TaskTemplate builtin_template(std::string_view name);

// Template files are JSON objects {name, body, separator, k_max}.
TaskTemplate load_template(const std::filesystem::path& path);
void save_template(const TaskTemplate& tmpl, const std::filesystem::path& path);

// How dataset records map onto Examples. When `fixed_choices` is non-empty
// records need not carry their own choices.
struct DatasetSchema {
  std::vector<std::string> slots;
  std::string label_field = "label";
  std::string choices_field = "choices";
  std::vector<std::string> fixed_choices;
};

DatasetSchema schema_for(const TaskTemplate& tmpl);

// Reads line-delimited JSON records. Ids are assigned sequentially from 0
// in file order. Labels may be an integer index or the text of a choice.
std::vector<Example> parse_dataset(std::istream& in, const DatasetSchema& schema);
std::vector<Example> load_dataset(const std::filesystem::path& path,
                                  const DatasetSchema& schema);

struct SplitSizes {
  std::size_t train = 400;
  std::size_t dev = 200;
  std::size_t test = 500;
};

// Train (S), dev (V) and test (T) roles.
struct DatasetSplits {
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
};

DatasetSplits split_dataset(std::span<const Example> examples, SplitSizes sizes,
                            std::uint64_t seed = kDefaultSeed);

enum class SplitRole { kTrain, kDev, kTest };

// Id lookup over a DatasetSplits. Holds a reference; the splits must
// outlive the index.
class SplitIndex {
 public:
  explicit SplitIndex(const DatasetSplits& splits);

  const DatasetSplits& splits() const { return *splits_; }
  const Example* find(ExampleId id) const;
  const Example& at(ExampleId id) const;
  SplitRole role(ExampleId id) const;

 private:
  const DatasetSplits* splits_;
  std::unordered_map<ExampleId, std::pair<SplitRole, const Example*>> by_id_;
};

std::vector<ExampleId> ids_of(std::span<const Example> examples);

// Labeled rendering appends the gold continuation at the answer slot; the
// unlabeled rendering stops where the continuation would begin.
std::string render_example(const TaskTemplate& tmpl, const Example& ex,
                           bool include_label);

// A structured prompt: ordered demonstrations plus one query.
struct PromptSpec {
  std::vector<ExampleId> context;
  ExampleId query = 0;
  std::string text;
  std::vector<std::string> continuations;
};

// Context ids must belong to the train split; the query may come from any
// split but never from the context.
PromptSpec build_prompt(const TaskTemplate& tmpl, std::span<const ExampleId> context,
                        ExampleId query, const SplitIndex& index);

// Label-balanced k-shot draw: per-class counts differ by at most one and
// the returned order is random.
std::vector<ExampleId> sample_label_balanced(std::span<const Example> pool,
                                             std::size_t k, Rng& rng);

}  // namespace icinfl

#endif  // ICINFL_CORPUS_H_
