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

#ifndef ICINFL_STATS_H_
#define ICINFL_STATS_H_

#include <span>
#include <vector>

namespace icinfl::stats {

double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator). Zero for n < 2.
double sample_stdev(std::span<const double> values);

// sample_stdev / sqrt(n).
double standard_error(std::span<const double> values);

// Pearson correlation. Throws DataError when either side is constant or
// fewer than two values are given.
double pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Linear-interpolation quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::span<const double> values, double q);

double interquartile_range(std::span<const double> values);

}  // namespace icinfl::stats

#endif  // ICINFL_STATS_H_
