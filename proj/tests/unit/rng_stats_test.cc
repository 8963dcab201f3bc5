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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "icinfl/error.h"
#include "icinfl/rng.h"
#include "icinfl/stats.h"

namespace icinfl {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, BelowStaysInRangeAndHitsEveryValue) {
  Rng rng(1);
  std::set<std::size_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(3);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto shuffled = v;
  rng.shuffle(shuffled);
  EXPECT_NE(shuffled, v);
  std::sort(shuffled.begin(), shuffled.end());
  EXPECT_EQ(shuffled, v);
}

TEST(Rng, SampleDrawsDistinctElements) {
  Rng rng(9);
  const std::vector<int> pool{1, 2, 3, 4, 5, 6, 7, 8};
  const auto s = rng.sample<int>(pool, 5);
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), 5u);
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(5);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
}

TEST(Hashing, OrderSensitiveAndStable) {
  EXPECT_EQ(hash_words({1, 2, 3}), hash_words({1, 2, 3}));
  EXPECT_NE(hash_words({1, 2, 3}), hash_words({3, 2, 1}));
  EXPECT_EQ(hash_string("abc"), hash_string("abc"));
  EXPECT_NE(hash_string("abc"), hash_string("abd"));
}

TEST(Seeds, EvaluationSeedList) {
  const std::vector<std::uint64_t> expected{42, 51, 56, 67, 75, 82, 98};
  EXPECT_EQ(default_evaluation_seeds(), expected);
}

TEST(Stats, MeanStdevStderr) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(stats::mean(v), 2.5);
  EXPECT_NEAR(stats::sample_stdev(v), std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_NEAR(stats::standard_error(v), std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
  const std::vector<double> one{3.0};
  EXPECT_EQ(stats::sample_stdev(one), 0.0);
}

TEST(Stats, PearsonExtremes) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 6, 8, 10};
  std::vector<double> neg;
  for (double v : x) neg.push_back(7.0 - 3.0 * v);
  EXPECT_NEAR(stats::pearson(x, y), 1.0, 1e-12);
  EXPECT_NEAR(stats::pearson(x, neg), -1.0, 1e-12);
}

TEST(Stats, PearsonRejectsConstantInput) {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> c{0.5, 0.5, 0.5};
  EXPECT_THROW(stats::pearson(x, c), DataError);
  const std::vector<double> one{1.0};
  EXPECT_THROW(stats::pearson(one, one), DataError);
}

TEST(Stats, AverageRanksShareTies) {
  const std::vector<double> v{10, 20, 20, 5};
  const auto r = stats::average_ranks(v);
  EXPECT_EQ(r, (std::vector<double>{2.0, 3.5, 3.5, 1.0}));
}

TEST(Stats, SpearmanMonotoneTransform) {
  const std::vector<double> x{0.1, 0.5, 0.3, 0.9, 0.7};
  std::vector<double> y;
  for (double v : x) y.push_back(std::exp(5 * v));
  EXPECT_NEAR(stats::spearman(x, y), 1.0, 1e-12);
}

TEST(Stats, QuantileType7) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(stats::quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(stats::quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(stats::interquartile_range(v), 1.5);
}

}  // namespace
}  // namespace icinfl
