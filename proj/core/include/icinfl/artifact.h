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

#ifndef ICINFL_ARTIFACT_H_
#define ICINFL_ARTIFACT_H_

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace icinfl {

// Role -> content hash of each input an artifact was derived from.
using Provenance = std::map<std::string, std::string>;

// 16 hex digits of a 64-bit FNV-1a hash.
std::string content_hash(std::string_view bytes);
std::string file_content_hash(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal representation that round-trips.
std::string format_double(double value);

// Minimal RFC 4180 writer.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
};

}  // namespace icinfl

#endif  // ICINFL_ARTIFACT_H_
