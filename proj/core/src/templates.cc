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

#include <fstream>
#include <sstream>

#include "icinfl/corpus.h"
#include "icinfl/error.h"
#include "json.hpp"

namespace icinfl {
namespace {

struct BuiltinTemplate {
  const char* name;
  const char* body;
  int k_max;
};

// k_max is the number of demonstrations that fit a 2048-token window.
constexpr BuiltinTemplate kBuiltins[] = {
    {"piqa", "Goal: {goal}\nAnswer: {answer}", 38},
    {"boolq", "{passage}\nquestion: {question}?\nanswer: {answer}", 10},
    {"rte", "{premise}\nquestion: {hypothesis}. true or false?\nanswer: {answer}", 12},
    {"wic",
     "{sentence1}\n{sentence2}\nquestion: Is the word '{word}' used in the same "
     "sense in the two sentences above?\nanswer: {answer}",
     32},
    {"wsc",
     "Passage: {text}\nQuestion: In the passage above, does the pronoun "
     "'{span2}' refer to {span1}?\nAnswer: {answer}",
     32},
    {"arc_challenge", "Question: {question}\nAnswer: {answer}", 46},
    {"arc_easy", "Question: {question}\nAnswer: {answer}", 52},
    {"hellaswag", "Context: {context}\nAnswer: {answer}", 18},
    {"obqa", "Context: {context}\nAnswer: {answer}", 52},
};

}  // namespace

std::vector<std::string> builtin_template_names() {
  std::vector<std::string> names;
  for (const auto& b : kBuiltins) names.emplace_back(b.name);
  return names;
}

TaskTemplate builtin_template(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (name == b.name) {
      TaskTemplate t{b.name, b.body, std::string(kDefaultSeparator), b.k_max};
      t.validate();
      return t;
    }
  }
  throw ConfigError("unknown task template: " + std::string(name));
}

TaskTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("template " + path.string() + ": " + e.what());
  }
  TaskTemplate t;
  try {
    t.name = j.at("name").get<std::string>();
    t.body = j.at("body").get<std::string>();
    t.separator = j.value("separator", std::string(kDefaultSeparator));
    t.k_max = j.at("k_max").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("template " + path.string() + ": " + e.what());
  }
  t.validate();
  return t;
}

void save_template(const TaskTemplate& tmpl, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["name"] = tmpl.name;
  j["body"] = tmpl.body;
  j["separator"] = tmpl.separator;
  j["k_max"] = tmpl.k_max;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write template file " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace icinfl
