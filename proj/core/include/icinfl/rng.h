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

#ifndef ICINFL_RNG_H_
#define ICINFL_RNG_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace icinfl {

// Seeds used for every multi-seed evaluation (random orderings, bin draws).
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::uint64_t kEvaluationSeeds[] = {42, 51, 56, 67, 75, 82, 98};

std::vector<std::uint64_t> default_evaluation_seeds();

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Order-sensitive hash of a sequence of words.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
std::uint64_t hash_string(std::string_view text);

// Maps 64 random bits to [0, 1) with 53-bit resolution.
inline double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Seeded generator with portable bounded sampling. std:: distributions are
// implementation-defined, so every draw goes through the helpers below to
// keep runs bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  double uniform() { return to_unit_interval(next()); }

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

  // k distinct elements drawn without replacement, in draw order.
  template <class T>
  std::vector<T> sample(std::span<const T> values, std::size_t k) {
    std::vector<T> pool(values.begin(), values.end());
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + below(pool.size() - i)]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace icinfl

#endif  // ICINFL_RNG_H_
