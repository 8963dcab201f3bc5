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

#ifndef ICINFL_POSITIONAL_H_
#define ICINFL_POSITIONAL_H_

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "icinfl/collector.h"

namespace icinfl {

// One prompt of a position study: assignment[g] is the member drawn from
// group g, ordering[p] the example shown at position p.
struct PositionalRecord {
  std::vector<ExampleId> assignment;
  std::size_t permutation_index = 0;
  std::vector<ExampleId> ordering;
  double metric = 0.0;
};

struct PositionalRun {
  std::vector<std::vector<ExampleId>> groups;
  std::size_t k = 0;
  std::vector<PositionalRecord> records;
};

inline constexpr std::size_t kMaxPositions = 6;
inline constexpr std::size_t kDefaultAssignments = 25;

// Shuffles the pool and cuts it into k groups whose sizes differ by at most one.
std::vector<std::vector<ExampleId>> partition_groups(std::span<const ExampleId> pool,
                                                     std::size_t k, std::uint64_t seed);

// For each of `num_assignments` draws of one member per group, evaluates
// every ordering of the drawn examples on the dev split (orderings in
// lexicographic order of group indices).
PositionalRun run_position_study(const std::vector<std::vector<ExampleId>>& groups,
                                 std::size_t num_assignments, const SplitIndex& index,
                                 Backend& backend, const TaskTemplate& tmpl,
                                 std::uint64_t seed = kDefaultSeed);

enum class PositionalContrast {
  // Records with the id at p against every record without it at p.
  kAllRecords,
  // Records with the id at p against records holding the id elsewhere.
  kSameExample,
};

struct PositionSummary {
  double mean = 0.0;
  double mean_abs = 0.0;
  double iqr = 0.0;
  double stderr_mean = 0.0;
  std::size_t n_ids = 0;
};

struct PositionalInfluence {
  std::map<std::pair<ExampleId, std::size_t>, double> per_pair;
  std::map<std::pair<ExampleId, std::size_t>, std::size_t> pair_counts;
  std::vector<PositionSummary> per_position;
  std::vector<std::string> warnings;
};

PositionalInfluence positional_influence(const PositionalRun& run,
                                         PositionalContrast contrast = PositionalContrast::kAllRecords);

void write_pairs_csv(std::ostream& out, const PositionalInfluence& influence);
void write_positions_csv(std::ostream& out, const PositionalInfluence& influence);

}  // namespace icinfl

#endif  // ICINFL_POSITIONAL_H_
