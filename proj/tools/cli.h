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

#ifndef ICINFL_TOOLS_CLI_H_
#define ICINFL_TOOLS_CLI_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "icinfl/backend.h"
#include "icinfl/corpus.h"
#include "icinfl/rng.h"

namespace icinfl::cli {

// Settings shared by every command. Each field maps to a flag of the same
// name (underscores become dashes) and to a key in the --config file.
struct PipelineConfig {
  std::string task = "boolq";
  std::string template_spec;  // built-in name or template file; defaults to task
  std::string dataset;
  SplitSizes sizes;
  std::uint64_t split_seed = kDefaultSeed;
  std::uint64_t seed = kDefaultSeed;
  std::size_t k = 0;            // 0 selects the template's k_max
  std::size_t num_subsets = 0;  // 0 derives M from the coverage target
  double coverage = 30.0;
  std::string backend = "synthetic";
  std::string model;
  std::string endpoint;
  std::string embedding_model;
  int token_budget = 2048;
  int max_in_flight = 1;
  std::vector<std::uint64_t> seeds = default_evaluation_seeds();
  double quality_lo = -0.05;
  double quality_hi = 0.05;
  double synthetic_weight = 2.0;
  std::vector<double> position_weights;
  double base_accuracy = 0.5;
  bool noise = true;
  double lambda = 1e-4;
  double heldout = 0.1;
  std::filesystem::path out_dir = ".";
};

TaskTemplate resolve_template(const PipelineConfig& config);

// Splits files carry the examples of all three roles plus provenance.
void save_splits(const std::filesystem::path& path, const DatasetSplits& splits,
                 const std::map<std::string, std::string>& inputs);
DatasetSplits load_splits(const std::filesystem::path& path);

// Validates the configuration before constructing anything that could
// reach the network.
std::unique_ptr<Backend> make_backend(const PipelineConfig& config, const DatasetSplits& splits,
                                      const TaskTemplate& tmpl);

// Parses argv-style arguments and runs one command. Results go to `out` as
// a JSON summary line; failures go to `err` as a JSON error record and the
// return value is nonzero.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icinfl::cli

#endif  // ICINFL_TOOLS_CLI_H_
