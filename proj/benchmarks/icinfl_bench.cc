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

#include <benchmark/benchmark.h>

#include "icinfl/collector.h"
#include "icinfl/datamodel.h"
#include "icinfl/influence.h"
#include "icinfl/synthetic_backend.h"
#include "support/fixtures.h"

namespace icinfl {
namespace {

RunDataset make_run(std::size_t train, std::size_t k, std::size_t m) {
  const auto splits = testing::synthetic_splits(train, 50, 2);
  const SplitIndex index(splits);
  SyntheticBackend b(
      testing::oracle_config(splits, -0.1, 0.1, std::vector<double>(k, 1.0), true, 1), splits);
  CollectOptions o;
  o.task = "bench";
  o.k = k;
  o.num_subsets = m;
  return collect(index, o, b, testing::synthetic_template()).run;
}

void BM_InfluenceScores(benchmark::State& state) {
  const auto run = make_run(400, 16, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(influence_scores(run));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_InfluenceScores)->Arg(750)->Arg(3000);

void BM_FitDatamodel(benchmark::State& state) {
  const auto run = make_run(400, 16, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_datamodel(run));
}
BENCHMARK(BM_FitDatamodel)->Arg(750)->Unit(benchmark::kMillisecond);

void BM_Collect(benchmark::State& state) {
  const auto splits = testing::synthetic_splits(400, 200, 2);
  const SplitIndex index(splits);
  SyntheticBackend b(
      testing::oracle_config(splits, -0.1, 0.1, std::vector<double>(8, 1.0), true, 1), splits);
  CollectOptions o;
  o.task = "bench";
  o.k = 8;
  o.num_subsets = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(collect(index, o, b, testing::synthetic_template()));
  }
  state.SetItemsProcessed(state.iterations() * 50 * 200);
}
BENCHMARK(BM_Collect)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace icinfl

BENCHMARK_MAIN();
