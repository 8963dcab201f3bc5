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

#include "icinfl/corpus.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "icinfl/error.h"
#include "json.hpp"

namespace icinfl {
namespace {

// Splits a template body into literal text and slot names. Odd entries of
// the result are slot names.
std::vector<std::string> tokenize_body(const std::string& body) {
  std::vector<std::string> parts;
  std::string literal;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      const auto close = body.find('}', i + 1);
      if (close == std::string::npos) {
        throw ConfigError("template has an unterminated slot");
      }
      parts.push_back(std::move(literal));
      literal.clear();
      parts.push_back(body.substr(i + 1, close - i - 1));
      i = close + 1;
    } else {
      literal.push_back(body[i++]);
    }
  }
  parts.push_back(std::move(literal));
  return parts;
}

int resolve_label(const nlohmann::json& label, const std::vector<std::string>& choices,
                  std::size_t record) {
  if (label.is_number_integer()) {
    const auto idx = label.get<long long>();
    if (idx < 0 || idx >= static_cast<long long>(choices.size())) {
      throw DataError(fmt::format("label out of range at record {}", record));
    }
    return static_cast<int>(idx);
  }
  std::string text;
  if (label.is_string()) {
    text = label.get<std::string>();
  } else if (label.is_boolean()) {
    text = label.get<bool>() ? "true" : "false";
  } else {
    throw DataError(fmt::format("unsupported label type at record {}", record));
  }
  const auto it = std::find(choices.begin(), choices.end(), text);
  if (it == choices.end()) {
    throw DataError(fmt::format("label \"{}\" not among choices at record {}", text, record));
  }
  return static_cast<int>(it - choices.begin());
}

}  // namespace

std::vector<std::string> TaskTemplate::slots() const {
  const auto parts = tokenize_body(body);
  std::vector<std::string> names;
  for (std::size_t i = 1; i < parts.size(); i += 2) {
    if (parts[i] == kAnswerSlot) continue;
    if (std::find(names.begin(), names.end(), parts[i]) == names.end()) {
      names.push_back(parts[i]);
    }
  }
  return names;
}

void TaskTemplate::validate() const {
  if (separator.empty()) throw ConfigError("template separator must be non-empty");
  if (k_max < 1) throw ConfigError("template k_max must be >= 1");
  const auto parts = tokenize_body(body);
  int answers = 0;
  for (std::size_t i = 1; i < parts.size(); i += 2) {
    if (parts[i].empty()) throw ConfigError("template has an empty slot name");
    if (parts[i] == kAnswerSlot) ++answers;
  }
  if (answers != 1 || parts.size() < 3 || parts[parts.size() - 2] != kAnswerSlot ||
      !parts.back().empty()) {
    throw ConfigError("template body must end with exactly one {answer} slot");
  }
}

DatasetSchema schema_for(const TaskTemplate& tmpl) {
  DatasetSchema schema;
  schema.slots = tmpl.slots();
  return schema;
}

std::vector<Example> parse_dataset(std::istream& in, const DatasetSchema& schema) {
  std::vector<Example> out;
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(fmt::format("malformed record {}: {}", record, e.what()));
    }
    if (!j.is_object()) throw DataError(fmt::format("record {} is not an object", record));

    Example ex;
    ex.id = static_cast<ExampleId>(record);
    for (const auto& slot : schema.slots) {
      const auto it = j.find(slot);
      if (it == j.end() || !it->is_string()) {
        throw DataError(fmt::format("missing slot {} at record {}", slot, record));
      }
      ex.fields[slot] = it->get<std::string>();
    }
    if (const auto it = j.find(schema.choices_field); it != j.end()) {
      if (!it->is_array()) {
        throw DataError(fmt::format("choices must be a list at record {}", record));
      }
      for (const auto& c : *it) ex.choices.push_back(c.get<std::string>());
    } else {
      ex.choices = schema.fixed_choices;
    }
    if (ex.choices.empty()) throw DataError(fmt::format("empty choices at record {}", record));
    if (ex.choices.size() < 2) {
      throw DataError(fmt::format("fewer than 2 choices at record {}", record));
    }
    const auto label = j.find(schema.label_field);
    if (label == j.end()) throw DataError(fmt::format("missing label at record {}", record));
    ex.label_index = resolve_label(*label, ex.choices, record);
    out.push_back(std::move(ex));
    ++record;
  }
  return out;
}

std::vector<Example> load_dataset(const std::filesystem::path& path,
                                  const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return parse_dataset(in, schema);
}

DatasetSplits split_dataset(std::span<const Example> examples, SplitSizes sizes,
                            std::uint64_t seed) {
  const std::size_t need = sizes.train + sizes.dev + sizes.test;
  if (need > examples.size()) {
    throw DataError(fmt::format("split needs {} examples but only {} available", need,
                                examples.size()));
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                 order.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(idx.begin(), idx.end());
    std::vector<Example> part;
    part.reserve(count);
    for (auto i : idx) part.push_back(examples[i]);
    return part;
  };
  DatasetSplits splits;
  splits.train = take(0, sizes.train);
  splits.dev = take(sizes.train, sizes.dev);
  splits.test = take(sizes.train + sizes.dev, sizes.test);
  return splits;
}

SplitIndex::SplitIndex(const DatasetSplits& splits) : splits_(&splits) {
  auto add = [&](const std::vector<Example>& part, SplitRole role) {
    for (const auto& ex : part) {
      if (!by_id_.emplace(ex.id, std::make_pair(role, &ex)).second) {
        throw DataError(fmt::format("example id {} appears in more than one split", ex.id));
      }
    }
  };
  add(splits.train, SplitRole::kTrain);
  add(splits.dev, SplitRole::kDev);
  add(splits.test, SplitRole::kTest);
}

const Example* SplitIndex::find(ExampleId id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : it->second.second;
}

const Example& SplitIndex::at(ExampleId id) const {
  const auto* ex = find(id);
  if (ex == nullptr) throw DataError(fmt::format("unknown example id {}", id));
  return *ex;
}

SplitRole SplitIndex::role(ExampleId id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) throw DataError(fmt::format("unknown example id {}", id));
  return it->second.first;
}

std::vector<ExampleId> ids_of(std::span<const Example> examples) {
  std::vector<ExampleId> ids;
  ids.reserve(examples.size());
  for (const auto& ex : examples) ids.push_back(ex.id);
  return ids;
}

std::string render_example(const TaskTemplate& tmpl, const Example& ex, bool include_label) {
  const auto parts = tokenize_body(tmpl.body);
  std::string text;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i % 2 == 0) {
      text += parts[i];
      continue;
    }
    if (parts[i] == kAnswerSlot) {
      if (!include_label) break;
      text += ex.gold();
      continue;
    }
    const auto it = ex.fields.find(parts[i]);
    if (it == ex.fields.end()) throw DataError("unresolved slot " + parts[i]);
    text += it->second;
  }
  if (text.find(tmpl.separator) != std::string::npos) {
    throw DataError(fmt::format("example {} contains the separator token", ex.id));
  }
  for (const auto& choice : ex.choices) {
    if (choice.find(tmpl.separator) != std::string::npos) {
      throw DataError(fmt::format("example {} has a choice containing the separator", ex.id));
    }
  }
  return text;
}

PromptSpec build_prompt(const TaskTemplate& tmpl, std::span<const ExampleId> context,
                        ExampleId query, const SplitIndex& index) {
  PromptSpec prompt;
  prompt.context.assign(context.begin(), context.end());
  prompt.query = query;
  for (ExampleId id : context) {
    if (id == query) {
      throw DataError(fmt::format("query {} appears in its own context", query));
    }
    if (index.role(id) != SplitRole::kTrain) {
      throw DataError(fmt::format("context example {} is not in the train split", id));
    }
    prompt.text += render_example(tmpl, index.at(id), true);
    prompt.text += tmpl.separator;
  }
  const Example& q = index.at(query);
  prompt.text += render_example(tmpl, q, false);
  prompt.continuations = q.choices;
  return prompt;
}

std::vector<ExampleId> sample_label_balanced(std::span<const Example> pool, std::size_t k,
                                             Rng& rng) {
  if (k > pool.size()) {
    throw DataError(fmt::format("cannot draw {} examples from a pool of {}", k, pool.size()));
  }
  std::map<int, std::vector<ExampleId>> by_class;
  for (const auto& ex : pool) by_class[ex.label_index].push_back(ex.id);
  if (k == 0) return {};

  std::vector<int> classes;
  for (const auto& [label, _] : by_class) classes.push_back(label);
  const std::size_t c = classes.size();
  std::map<int, std::size_t> quota;
  for (int label : classes) quota[label] = k / c;
  // The k % c classes that receive one extra example are chosen uniformly.
  for (int label : rng.sample<int>(classes, k % c)) ++quota[label];

  std::vector<ExampleId> out;
  out.reserve(k);
  for (int label : classes) {
    const auto& members = by_class[label];
    if (quota[label] > members.size()) {
      throw DataError(fmt::format("class {} exhausted", label));
    }
    const auto drawn = rng.sample<ExampleId>(members, quota[label]);
    out.insert(out.end(), drawn.begin(), drawn.end());
  }
  rng.shuffle(out);
  return out;
}

}  // namespace icinfl
