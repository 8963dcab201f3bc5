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

#include "icinfl/influence.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "icinfl/error.h"
#include "json.hpp"

namespace icinfl {

using nlohmann::json;

InfluenceReport influence_scores(const RunDataset& run) {
  const std::size_t m = run.records.size();
  if (m < 2) throw DataError("influence needs at least 2 records");

  struct Acc {
    double include_sum = 0.0;
    std::size_t n = 0;
  };
  std::unordered_map<ExampleId, Acc> acc;
  acc.reserve(run.train_ids.size());
  for (ExampleId id : run.train_ids) acc[id];
  double total = 0.0;
  for (const auto& rec : run.records) {
    total += rec.metric;
    for (ExampleId id : rec.subset_ids) {
      auto& a = acc[id];
      a.include_sum += rec.metric;
      ++a.n;
    }
  }

  InfluenceReport report;
  report.m_total = m;
  report.task = run.task;
  report.backend = run.backend;
  report.inputs = run.inputs;
  std::vector<ExampleId> ids;
  ids.reserve(acc.size());
  for (const auto& [id, a] : acc) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (ExampleId id : ids) {
    const auto& a = acc[id];
    report.n_included[id] = a.n;
    if (a.n == 0 || a.n == m) {
      report.undefined_ids.push_back(id);
      continue;
    }
    const double in_mean = a.include_sum / static_cast<double>(a.n);
    const double out_mean = (total - a.include_sum) / static_cast<double>(m - a.n);
    report.scores[id] = in_mean - out_mean;
  }
  if (!report.undefined_ids.empty()) {
    report.warnings.push_back(fmt::format(
        "{} example(s) appear in no record or in every record and are left unscored",
        report.undefined_ids.size()));
  }
  return report;
}

std::string to_string(Sign sign) { return sign == Sign::kPositive ? "positive" : "negative"; }

Sign sign_from_string(std::string_view name) {
  if (name == "positive" || name == "+") return Sign::kPositive;
  if (name == "negative" || name == "-") return Sign::kNegative;
  throw ConfigError(fmt::format("unknown sign '{}'", name));
}

std::vector<ExampleId> rank_by_score(const std::map<ExampleId, double>& scores, Sign sign) {
  std::vector<std::pair<ExampleId, double>> items(scores.begin(), scores.end());
  std::stable_sort(items.begin(), items.end(), [sign](const auto& a, const auto& b) {
    if (a.second != b.second) {
      return sign == Sign::kPositive ? a.second > b.second : a.second < b.second;
    }
    return a.first < b.first;
  });
  std::vector<ExampleId> out;
  out.reserve(items.size());
  for (const auto& [id, s] : items) out.push_back(id);
  return out;
}

std::vector<ExampleId> select_examples(const InfluenceReport& report, std::size_t k, Sign sign) {
  if (k > report.scores.size()) {
    throw ConfigError(
        fmt::format("cannot select {} examples from {} scored ids", k, report.scores.size()));
  }
  auto ranked = rank_by_score(report.scores, sign);
  ranked.resize(k);
  return ranked;
}

PercentileBins percentile_bins(const InfluenceReport& report, std::size_t n_bins) {
  if (n_bins < 2) throw ConfigError("need at least 2 bins");
  const std::size_t n = report.scores.size();
  if (n < n_bins) {
    throw ConfigError(fmt::format("{} scored ids cannot fill {} bins", n, n_bins));
  }
  const auto sorted = rank_by_score(report.scores, Sign::kNegative);
  PercentileBins out;
  const std::size_t base = n / n_bins;
  const std::size_t extra = n % n_bins;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    out.bins.emplace_back(sorted.begin() + static_cast<std::ptrdiff_t>(pos),
                          sorted.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return out;
}

std::vector<SelectionEvaluation> evaluate_bins(const PercentileBins& bins, std::size_t k,
                                               std::span<const Example> queries,
                                               Backend& backend, const TaskTemplate& tmpl,
                                               const SplitIndex& index,
                                               std::span<const std::uint64_t> seeds) {
  std::vector<SelectionEvaluation> out;
  out.reserve(bins.bins.size());
  for (std::size_t b = 0; b < bins.bins.size(); ++b) {
    const auto& bin = bins.bins[b];
    if (k > bin.size()) {
      throw ConfigError(fmt::format("bin {} has {} ids, fewer than k={}", b + 1, bin.size(), k));
    }
    std::vector<std::vector<ExampleId>> orderings;
    for (std::uint64_t seed : seeds) {
      Rng rng(hash_words({seed, static_cast<std::uint64_t>(b)}));
      orderings.push_back(rng.sample(std::span<const ExampleId>(bin), k));
    }
    out.push_back(evaluate_orderings(orderings, seeds, queries, backend, tmpl, index));
  }
  return out;
}

double influence_gap(const SelectionEvaluation& top, const SelectionEvaluation& bottom) {
  if (top.query_ids != bottom.query_ids) {
    throw DataError("top and bottom evaluations used different queries");
  }
  if (top.k != bottom.k) throw DataError("top and bottom evaluations used different k");
  if (top.accuracies.empty() || bottom.accuracies.empty()) {
    throw DataError("gap needs at least one evaluation per side");
  }
  return 100.0 * (top.mean() - bottom.mean());
}

namespace {

std::set<ExampleId> universe_of(const InfluenceReport& r) {
  std::set<ExampleId> u;
  for (const auto& [id, n] : r.n_included) u.insert(id);
  for (const auto& [id, s] : r.scores) u.insert(id);
  for (ExampleId id : r.undefined_ids) u.insert(id);
  return u;
}

}  // namespace

Overlap overlap_analysis(std::span<const InfluenceReport> reports, BinEnd end, double frac) {
  if (reports.size() < 2) throw ConfigError("overlap needs at least 2 reports");
  if (!(frac > 0.0 && frac <= 1.0)) throw ConfigError("overlap fraction must be in (0, 1]");
  const auto universe = universe_of(reports.front());
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (universe_of(reports[i]) != universe) {
      throw DataError("reports cover different example universes");
    }
  }
  Overlap out;
  out.per_report = static_cast<std::size_t>(std::lround(frac * static_cast<double>(universe.size())));
  std::set<ExampleId> inter;
  std::set<ExampleId> uni;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto ranked =
        rank_by_score(reports[i].scores, end == BinEnd::kTop ? Sign::kPositive : Sign::kNegative);
    if (ranked.size() < out.per_report) {
      throw DataError("too few scored ids for the requested fraction");
    }
    ranked.resize(out.per_report);
    std::set<ExampleId> chosen(ranked.begin(), ranked.end());
    uni.insert(chosen.begin(), chosen.end());
    if (i == 0) {
      inter = chosen;
    } else {
      std::set<ExampleId> next;
      std::set_intersection(inter.begin(), inter.end(), chosen.begin(), chosen.end(),
                            std::inserter(next, next.end()));
      inter.swap(next);
    }
  }
  out.intersection = inter.size();
  out.union_size = uni.size();
  return out;
}

void write_report(std::ostream& out, const InfluenceReport& report) {
  json header = {{"type", "influence"},
                 {"task", report.task},
                 {"m", report.m_total},
                 {"backend",
                  {{"kind", to_string(report.backend.kind)},
                   {"model", report.backend.model_name},
                   {"token_budget", report.backend.token_budget},
                   {"max_in_flight", report.backend.max_in_flight}}},
                 {"inputs", report.inputs}};
  out << header.dump() << '\n';
  for (const auto& [id, n] : report.n_included) {
    json row = {{"id", id}, {"n", n}};
    const auto it = report.scores.find(id);
    row["score"] = it == report.scores.end() ? json(nullptr) : json(it->second);
    out << row.dump() << '\n';
  }
}

void save_report(const std::filesystem::path& path, const InfluenceReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_report(out, report);
}

InfluenceReport parse_report(std::istream& in) {
  InfluenceReport report;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      if (!have_header) {
        if (j.value("type", "") != "influence") throw DataError("not an influence report");
        report.task = j.at("task").get<std::string>();
        report.m_total = j.at("m").get<std::size_t>();
        const auto& b = j.at("backend");
        report.backend.kind = backend_kind_from_string(b.at("kind").get<std::string>());
        report.backend.model_name = b.at("model").get<std::string>();
        report.backend.token_budget = b.at("token_budget").get<int>();
        report.backend.max_in_flight = b.at("max_in_flight").get<int>();
        report.inputs = j.at("inputs").get<Provenance>();
        have_header = true;
        continue;
      }
      const auto id = j.at("id").get<ExampleId>();
      report.n_included[id] = j.at("n").get<std::size_t>();
      if (j.at("score").is_null()) {
        report.undefined_ids.push_back(id);
      } else {
        report.scores[id] = j.at("score").get<double>();
      }
    } catch (const json::exception& e) {
      throw DataError(fmt::format("malformed report line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw DataError("influence report is empty");
  return report;
}

InfluenceReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_report(in);
}

void write_scores_csv(std::ostream& out, const InfluenceReport& report) {
  CsvWriter csv(out);
  csv.row({"id", "score", "n_included"});
  for (const auto& [id, n] : report.n_included) {
    const auto it = report.scores.find(id);
    csv.row({std::to_string(id), it == report.scores.end() ? "" : format_double(it->second),
             std::to_string(n)});
  }
}

}  // namespace icinfl
