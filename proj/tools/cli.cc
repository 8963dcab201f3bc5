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

#include "cli.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "icinfl/artifact.h"
#include "icinfl/baselines.h"
#include "icinfl/collector.h"
#include "icinfl/datamodel.h"
#include "icinfl/error.h"
#include "icinfl/influence.h"
#include "icinfl/positional.h"
#include "icinfl/remote_backend.h"
#include "icinfl/scaling.h"
#include "icinfl/stats.h"
#include "icinfl/synthetic_backend.h"
#include "json.hpp"

namespace icinfl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

TaskTemplate resolve_template(const PipelineConfig& config) {
  const std::string spec = config.template_spec.empty() ? config.task : config.template_spec;
  if (fs::exists(spec) && fs::is_regular_file(spec)) return load_template(spec);
  return builtin_template(spec);
}

namespace {

json example_json(const Example& ex) {
  return json{{"id", ex.id}, {"fields", ex.fields}, {"choices", ex.choices}, {"label", ex.label_index}};
}

Example example_from_json(const json& j) {
  Example ex;
  ex.id = j.at("id").get<ExampleId>();
  ex.fields = j.at("fields").get<std::map<std::string, std::string>>();
  ex.choices = j.at("choices").get<std::vector<std::string>>();
  ex.label_index = j.at("label").get<int>();
  if (ex.label_index < 0 || static_cast<std::size_t>(ex.label_index) >= ex.choices.size()) {
    throw DataError(fmt::format("label out of range for example {}", ex.id));
  }
  return ex;
}

json examples_json(const std::vector<Example>& xs) {
  json arr = json::array();
  for (const auto& ex : xs) arr.push_back(example_json(ex));
  return arr;
}

std::vector<Example> examples_from_json(const json& arr) {
  std::vector<Example> out;
  for (const auto& j : arr) out.push_back(example_from_json(j));
  return out;
}

json read_json_file(const fs::path& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(fmt::format("{} is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_text(path, ss.str());
}

fs::path or_default(const std::string& given, const PipelineConfig& cfg, const std::string& name) {
  return given.empty() ? cfg.out_dir / name : fs::path(given);
}

std::string template_hash(const TaskTemplate& tmpl) {
  return content_hash(json{{"name", tmpl.name},
                           {"body", tmpl.body},
                           {"separator", tmpl.separator},
                           {"k_max", tmpl.k_max}}
                          .dump());
}

// Minimal RFC 4180 reader for the CSVs this tool writes.
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  const auto text = read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (!cell.empty() || !row.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name,
                   const fs::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError(fmt::format("{} lacks a '{}' column", path.string(), name));
  }
  return static_cast<std::size_t>(it - header.begin());
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw DataError(fmt::format("not a number: '{}'", s));
    return v;
  } catch (const std::logic_error&) {
    throw DataError(fmt::format("not a number: '{}'", s));
  }
}

const std::vector<Example>& split_by_name(const DatasetSplits& splits, const std::string& name) {
  if (name == "dev") return splits.dev;
  if (name == "test") return splits.test;
  throw ConfigError(fmt::format("evaluation split must be dev or test, not '{}'", name));
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << json{{"warning", w}}.dump() << '\n';
}

}  // namespace

void save_splits(const fs::path& path, const DatasetSplits& splits,
                 const std::map<std::string, std::string>& inputs) {
  const json j = {{"type", "splits"},
                  {"inputs", inputs},
                  {"train", examples_json(splits.train)},
                  {"dev", examples_json(splits.dev)},
                  {"test", examples_json(splits.test)}};
  write_text(path, j.dump() + "\n");
}

DatasetSplits load_splits(const fs::path& path) {
  const auto j = read_json_file(path);
  try {
    if (j.value("type", "") != "splits") throw DataError(path.string() + " is not a splits file");
    DatasetSplits s;
    s.train = examples_from_json(j.at("train"));
    s.dev = examples_from_json(j.at("dev"));
    s.test = examples_from_json(j.at("test"));
    return s;
  } catch (const json::exception& e) {
    throw DataError(fmt::format("malformed splits file {}: {}", path.string(), e.what()));
  }
}

std::unique_ptr<Backend> make_backend(const PipelineConfig& config, const DatasetSplits& splits,
                                      const TaskTemplate& tmpl) {
  if (config.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  const auto kind = backend_kind_from_string(config.backend);
  if (kind == BackendKind::kRemote) {
    RemoteConfig rc;
    rc.endpoint = config.endpoint;
    rc.model = config.model;
    rc.embedding_model = config.embedding_model;
    rc.token_budget = config.token_budget;
    rc.max_in_flight = config.max_in_flight;
    return std::make_unique<RemoteBackend>(resolve_remote_config(rc));
  }
  SyntheticOracleConfig oc;
  const auto train_ids = ids_of(splits.train);
  oc.quality = linear_qualities(train_ids, config.quality_lo, config.quality_hi);
  if (!config.position_weights.empty()) {
    oc.position_weights = config.position_weights;
  } else {
    const std::size_t n = std::max<std::size_t>(static_cast<std::size_t>(tmpl.k_max), config.k);
    oc.position_weights.assign(n, config.synthetic_weight);
  }
  oc.base_accuracy = config.base_accuracy;
  oc.noise_seed = config.seed;
  oc.noise = config.noise;
  auto descriptor = SyntheticBackend::default_descriptor();
  descriptor.max_in_flight = config.max_in_flight;
  return std::make_unique<SyntheticBackend>(std::move(oc), splits, descriptor);
}

namespace {

struct Context {
  PipelineConfig& cfg;
  std::ostream& out;
  std::ostream& err;
};

void cmd_synth_data(Context& c, std::size_t n, const std::string& out_path) {
  const auto tmpl = resolve_template(c.cfg);
  if (n == 0) throw ConfigError("--n must be positive");
  Rng rng(hash_words({c.cfg.seed, hash_string("synth-data")}));
  const auto slots = tmpl.slots();
  const std::vector<std::string> choices{"no", "yes"};
  const auto path = or_default(out_path, c.cfg, "dataset.jsonl");
  write_with(path, [&](std::ostream& os) {
    for (std::size_t i = 0; i < n; ++i) {
      json rec;
      for (const auto& slot : slots) {
        std::string text;
        for (int w = 0; w < 6; ++w) {
          if (w > 0) text += ' ';
          text += fmt::format("w{}", rng.below(500));
        }
        rec[slot] = text;
      }
      rec["choices"] = choices;
      rec["label"] = static_cast<int>(rng.below(choices.size()));
      os << rec.dump() << '\n';
    }
  });
  c.out << json{{"command", "synth-data"}, {"examples", n}, {"out", path.string()}}.dump() << '\n';
}

void cmd_split(Context& c, const std::string& out_path) {
  if (c.cfg.dataset.empty()) throw ConfigError("split requires --dataset");
  const auto tmpl = resolve_template(c.cfg);
  const auto examples = load_dataset(c.cfg.dataset, schema_for(tmpl));
  const auto splits = split_dataset(examples, c.cfg.sizes, c.cfg.split_seed);
  const auto path = or_default(out_path, c.cfg, "splits.json");
  save_splits(path, splits,
              {{"dataset", file_content_hash(c.cfg.dataset)},
               {"split_seed", std::to_string(c.cfg.split_seed)}});
  c.out << json{{"command", "split"},
                {"train", splits.train.size()},
                {"dev", splits.dev.size()},
                {"test", splits.test.size()},
                {"out", path.string()}}
                   .dump()
        << '\n';
}

void cmd_collect(Context& c, const std::string& splits_path, const std::string& out_path,
                 bool resume) {
  const auto tmpl = resolve_template(c.cfg);
  const auto sp = or_default(splits_path, c.cfg, "splits.json");
  const auto splits = load_splits(sp);
  const SplitIndex index(splits);
  const std::size_t k = c.cfg.k == 0 ? static_cast<std::size_t>(tmpl.k_max) : c.cfg.k;
  CollectOptions opts;
  opts.task = c.cfg.task;
  opts.k = k;
  opts.seed = c.cfg.seed;
  opts.num_subsets = c.cfg.num_subsets != 0
                         ? c.cfg.num_subsets
                         : default_subset_count(splits.train.size(), k, c.cfg.coverage);
  auto backend = make_backend(c.cfg, splits, tmpl);

  const auto path = or_default(out_path, c.cfg, "run.jsonl");
  RunDataset header;
  header.task = opts.task;
  header.k = k;
  header.seed = opts.seed;
  header.train_ids = ids_of(splits.train);
  header.backend = backend->descriptor();
  header.inputs = {{"splits", file_content_hash(sp)}, {"template", template_hash(tmpl)}};

  std::optional<RunDataset> existing;
  if (resume && fs::exists(path)) {
    existing = load_run(path);
    if (existing->inputs != header.inputs) {
      throw DataError("existing run file was built from different splits or template");
    }
    // Drop a torn trailing line before appending.
    save_run(path, *existing);
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  RunFileWriter writer(path, header, existing.has_value());
  const auto result = collect(index, opts, *backend, tmpl,
                              [&](const SubsetRecord& r) { writer.append(r); },
                              existing ? &*existing : nullptr);
  print_warnings(c.err, result.warnings);
  c.out << json{{"command", "collect"},
                {"records", result.run.records.size()},
                {"k", k},
                {"expected_coverage", result.expected_coverage},
                {"tokens", tokens_spent(result.run)},
                {"out", path.string()}}
                   .dump()
        << '\n';
}

void cmd_influence(Context& c, const std::string& run_path, const std::string& out_path,
                   const std::string& csv_path) {
  const auto rp = or_default(run_path, c.cfg, "run.jsonl");
  const auto run = load_run(rp);
  auto report = influence_scores(run);
  report.inputs["run"] = file_content_hash(rp);
  const auto path = or_default(out_path, c.cfg, "influence.jsonl");
  write_with(path, [&](std::ostream& os) { write_report(os, report); });
  const auto csv = or_default(csv_path, c.cfg, "influence.csv");
  write_with(csv, [&](std::ostream& os) { write_scores_csv(os, report); });
  print_warnings(c.err, report.warnings);
  c.out << json{{"command", "influence"},
                {"scored", report.scores.size()},
                {"undefined", report.undefined_ids.size()},
                {"out", path.string()}}
                   .dump()
        << '\n';
}

void cmd_datamodel(Context& c, const std::string& run_path, const std::string& out_path,
                   const std::string& csv_path) {
  const auto rp = or_default(run_path, c.cfg, "run.jsonl");
  const auto run = load_run(rp);
  auto fit = fit_datamodel(run, c.cfg.lambda, c.cfg.heldout, c.cfg.seed);
  fit.weights.inputs["run"] = file_content_hash(rp);
  const auto path = or_default(out_path, c.cfg, "datamodel.jsonl");
  write_with(path, [&](std::ostream& os) { write_weights(os, fit.weights); });

  json summary = {{"command", "datamodel"},
                  {"converged", fit.weights.converged},
                  {"sweeps", fit.weights.sweeps},
                  {"heldout", fit.heldout.size()},
                  {"out", path.string()}};
  const auto csv = or_default(csv_path, c.cfg, "datamodel.csv");
  write_with(csv, [&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"lambda", "n_train", "n_heldout", "pearson_rho", "mse", "converged"});
    std::string rho = "";
    std::string mse = "";
    if (fit.heldout.size() >= 2) {
      try {
        const auto corr = heldout_correlation(fit.weights, fit.heldout);
        rho = format_double(corr.pearson_rho);
        mse = format_double(corr.mse);
        summary["pearson_rho"] = corr.pearson_rho;
      } catch (const DataError& e) {
        print_warnings(c.err, {e.what()});
      }
    }
    w.row({format_double(fit.weights.lambda), std::to_string(fit.weights.train_record_count),
           std::to_string(fit.heldout.size()), rho, mse,
           fit.weights.converged ? "true" : "false"});
  });
  if (!fit.weights.converged) {
    print_warnings(c.err, {"coordinate descent stopped at the sweep limit"});
  }
  c.out << summary.dump() << '\n';
}

// Loads a baseline ranking CSV and re-ranks it under `sign`.
MethodRanking load_ranking(const fs::path& path, const std::string& method, Sign sign) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw DataError(path.string() + " is empty");
  const auto id_col = column(rows[0], "id", path);
  const auto score_col = column(rows[0], "score", path);
  std::map<ExampleId, double> scores;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    scores[static_cast<ExampleId>(std::stoll(rows[i].at(id_col)))] =
        parse_double(rows[i].at(score_col));
  }
  return make_ranking(method, std::move(scores), sign, method != "perplexity");
}

void cmd_select(Context& c, const std::string& method, const std::string& source,
                const std::string& sign_name, const std::string& splits_path,
                const std::string& out_path) {
  const Sign sign = sign_from_string(sign_name);
  const auto tmpl = resolve_template(c.cfg);
  const std::size_t k = c.cfg.k == 0 ? static_cast<std::size_t>(tmpl.k_max) : c.cfg.k;
  Provenance inputs;
  std::vector<ExampleId> ids;
  std::vector<std::string> warnings;
  const auto sp = or_default(splits_path, c.cfg, "splits.json");
  if (method == "influence") {
    const auto src = or_default(source, c.cfg, "influence.jsonl");
    const auto report = load_report(src);
    ids = select_examples(report, k, sign);
    inputs = report.inputs;
    inputs["source"] = file_content_hash(src);
  } else if (method == "datamodel") {
    const auto src = or_default(source, c.cfg, "datamodel.jsonl");
    const auto weights = load_weights(src);
    ids = datamodel_select(weights, k, sign, &warnings);
    inputs = weights.inputs;
    inputs["source"] = file_content_hash(src);
  } else if (method == "best_set") {
    const auto src = or_default(source, c.cfg, "run.jsonl");
    const auto run = load_run(src);
    ids = best_observed_set(run, sign);
    inputs = run.inputs;
    inputs["source"] = file_content_hash(src);
  } else if (method == "random") {
    const auto splits = load_splits(sp);
    Rng rng(hash_words({c.cfg.seed, hash_string("random-selection")}));
    ids = random_selection(splits.train, k, rng);
    inputs["splits"] = file_content_hash(sp);
  } else if (method == "oneshot" || method == "similarity" || method == "perplexity") {
    const auto src = or_default(source, c.cfg, "ranking_" + method + ".csv");
    ids = load_ranking(src, method, sign).top(k);
    inputs["splits"] = file_content_hash(sp);
    inputs["source"] = file_content_hash(src);
  } else {
    throw ConfigError(fmt::format("unknown selection method '{}'", method));
  }
  if (!inputs.contains("splits")) throw DataError("selection source lacks splits provenance");
  print_warnings(c.err, warnings);
  const auto path =
      or_default(out_path, c.cfg, fmt::format("selection_{}_{}.json", method, to_string(sign)));
  const json j = {{"type", "selection"}, {"method", method}, {"sign", to_string(sign)},
                  {"k", ids.size()},     {"ids", ids},       {"inputs", inputs}};
  write_text(path, j.dump() + "\n");
  c.out << json{{"command", "select"}, {"ids", ids}, {"out", path.string()}}.dump() << '\n';
}

void cmd_eval(Context& c, const std::string& selection_path, const std::string& splits_path,
              const std::string& split_name, const std::string& out_path) {
  if (selection_path.empty()) throw ConfigError("eval requires --selection");
  const auto tmpl = resolve_template(c.cfg);
  const auto sel = read_json_file(selection_path);
  if (sel.value("type", "") != "selection") {
    throw DataError(selection_path + " is not a selection file");
  }
  const auto sp = or_default(splits_path, c.cfg, "splits.json");
  const auto recorded = sel.at("inputs").value("splits", "");
  if (recorded != file_content_hash(sp)) {
    throw DataError("selection was derived from a different splits file; rerun the pipeline");
  }
  const auto splits = load_splits(sp);
  const SplitIndex index(splits);
  const auto ids = sel.at("ids").get<std::vector<ExampleId>>();
  for (ExampleId id : ids) {
    if (index.role(id) != SplitRole::kTrain) {
      throw DataError(fmt::format("selected id {} is not a train example", id));
    }
  }
  auto backend = make_backend(c.cfg, splits, tmpl);
  const auto& queries = split_by_name(splits, split_name);
  const auto ev = evaluate_selection(ids, queries, *backend, tmpl, index, c.cfg.seeds);
  const auto method = sel.at("method").get<std::string>();
  const auto sign = sel.at("sign").get<std::string>();
  const auto path =
      or_default(out_path, c.cfg, fmt::format("eval_{}_{}_{}.csv", method, sign, split_name));
  write_with(path, [&](std::ostream& os) {
    CsvWriter w(os);
    w.row({"method", "sign", "split", "seed", "accuracy"});
    for (std::size_t i = 0; i < ev.seeds.size(); ++i) {
      w.row({method, sign, split_name, std::to_string(ev.seeds[i]),
             format_double(ev.accuracies[i])});
    }
    w.row({method, sign, split_name, "mean", format_double(ev.mean())});
    w.row({method, sign, split_name, "stderr", format_double(ev.standard_error())});
  });
  c.out << json{{"command", "eval"},
                {"split", split_name},
                {"mean", ev.mean()},
                {"stderr", ev.standard_error()},
                {"out", path.string()}}
                   .dump()
        << '\n';
}

void cmd_baselines(Context& c, const std::vector<std::string>& methods,
                   const std::string& splits_path) {
  const auto tmpl = resolve_template(c.cfg);
  const auto splits = load_splits(or_default(splits_path, c.cfg, "splits.json"));
  const SplitIndex index(splits);
  auto backend = make_backend(c.cfg, splits, tmpl);
  json written = json::array();
  for (const auto& method : methods) {
    MethodRanking ranking;
    if (method == "oneshot") {
      ranking = oneshot_ranking(index, *backend, tmpl);
    } else if (method == "similarity") {
      ranking = similarity_ranking(index, *backend, tmpl);
    } else if (method == "perplexity") {
      ranking = perplexity_ranking(index, *backend, tmpl);
    } else {
      throw ConfigError(fmt::format("unknown baseline '{}'", method));
    }
    const auto path = c.cfg.out_dir / ("ranking_" + method + ".csv");
    write_with(path, [&](std::ostream& os) { write_ranking_csv(os, ranking); });
    written.push_back(path.string());
  }
  c.out << json{{"command", "baselines"}, {"out", written}}.dump() << '\n';
}

void cmd_aggregate(Context& c, const std::string& table_path, const std::string& sign_name,
                   const std::string& out_path) {
  if (table_path.empty()) throw ConfigError("aggregate requires --table");
  const auto rows = read_csv(table_path);
  if (rows.empty()) throw DataError(table_path + " is empty");
  const auto mcol = column(rows[0], "method", table_path);
  const auto tcol = column(rows[0], "task", table_path);
  const auto acol = column(rows[0], "accuracy", table_path);
  AccuracyTable table;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    const auto key = std::make_pair(r.at(mcol), r.at(tcol));
    if (table.contains(key)) {
      throw DataError(fmt::format("duplicate cell for {} on {}", key.first, key.second));
    }
    table[key] = parse_double(r.at(acol));
  }
  const auto agg = rank_aggregate(table, sign_from_string(sign_name));
  const auto path = or_default(out_path, c.cfg, "aggregate.csv");
  write_with(path, [&](std::ostream& os) { write_aggregate_csv(os, table, agg); });
  c.out << json{{"command", "aggregate"}, {"order", agg.ordering()}, {"out", path.string()}}.dump()
        << '\n';
}

void cmd_position_study(Context& c, const std::string& splits_path, std::size_t positions,
                        std::size_t pool_size, std::size_t assignments,
                        const std::string& contrast_name) {
  PositionalContrast contrast;
  if (contrast_name == "all") {
    contrast = PositionalContrast::kAllRecords;
  } else if (contrast_name == "same") {
    contrast = PositionalContrast::kSameExample;
  } else {
    throw ConfigError(fmt::format("unknown contrast '{}'; use all or same", contrast_name));
  }
  if (positions > kMaxPositions) {
    throw ConfigError(fmt::format("permutation budget exceeded: {} positions (at most {})",
                                  positions, kMaxPositions));
  }
  const auto tmpl = resolve_template(c.cfg);
  const auto splits = load_splits(or_default(splits_path, c.cfg, "splits.json"));
  const SplitIndex index(splits);
  if (pool_size > splits.train.size()) {
    throw ConfigError(fmt::format("pool of {} exceeds the train split", pool_size));
  }
  const auto train_ids = ids_of(splits.train);
  Rng rng(hash_words({c.cfg.seed, hash_string("position-pool")}));
  const auto pool = rng.sample(std::span<const ExampleId>(train_ids), pool_size);
  const auto groups = partition_groups(pool, positions, c.cfg.seed);
  auto backend = make_backend(c.cfg, splits, tmpl);
  const auto run = run_position_study(groups, assignments, index, *backend, tmpl, c.cfg.seed);
  const auto infl = positional_influence(run, contrast);
  print_warnings(c.err, infl.warnings);
  write_with(c.cfg.out_dir / "positional_pairs.csv",
             [&](std::ostream& os) { write_pairs_csv(os, infl); });
  write_with(c.cfg.out_dir / "positional_summary.csv",
             [&](std::ostream& os) { write_positions_csv(os, infl); });
  json mean_abs = json::array();
  for (const auto& s : infl.per_position) mean_abs.push_back(s.mean_abs);
  c.out << json{{"command", "position-study"},
                {"records", run.records.size()},
                {"mean_abs", mean_abs}}
                   .dump()
        << '\n';
}

void cmd_sweep(Context& c, const std::string& axis, const std::string& run_path,
               const std::string& splits_path, const std::vector<std::int64_t>& budgets,
               const std::vector<std::size_t>& ks, const std::vector<std::string>& methods,
               const std::string& split_name) {
  const auto tmpl = resolve_template(c.cfg);
  const auto splits = load_splits(or_default(splits_path, c.cfg, "splits.json"));
  const SplitIndex index(splits);
  const auto run = load_run(or_default(run_path, c.cfg, "run.jsonl"));
  auto backend = make_backend(c.cfg, splits, tmpl);
  SweepOptions opts;
  if (!methods.empty()) opts.methods = methods;
  opts.seeds = c.cfg.seeds;
  opts.lambda = c.cfg.lambda;
  const auto& queries = split_by_name(splits, split_name);
  SweepResult result;
  if (axis == "tokens") {
    if (budgets.empty()) throw ConfigError("token sweep requires --budgets");
    result = budget_sweep(run, budgets, queries, index, *backend, tmpl, opts);
  } else if (axis == "shots") {
    if (ks.empty()) throw ConfigError("shot sweep requires --ks");
    if (methods.empty()) {
      auto& m = opts.methods;
      m.erase(std::remove(m.begin(), m.end(), "best_set"), m.end());
    }
    result = shot_sweep(run, ks, queries, index, *backend, tmpl, opts);
  } else {
    throw ConfigError(fmt::format("unknown sweep axis '{}'; use tokens or shots", axis));
  }
  const auto path = c.cfg.out_dir / fmt::format("sweep_{}.csv", axis);
  write_with(path, [&](std::ostream& os) { write_sweep_csv(os, result); });
  std::size_t unavailable = 0;
  for (const auto& p : result.points) unavailable += p.available ? 0 : 1;
  c.out << json{{"command", "sweep"},
                {"axis", axis},
                {"points", result.points.size()},
                {"unavailable", unavailable},
                {"out", path.string()}}
                   .dump()
        << '\n';
}

int exit_code_for(const std::string& kind) {
  if (kind == "config" || kind == "usage") return 2;
  if (kind == "data") return 3;
  if (kind == "backend") return 4;
  if (kind == "overflow") return 5;
  return 1;
}

int report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  return exit_code_for(kind);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg;
  CLI::App app{"In-context example influence estimation and selection"};
  app.name("icinfl");
  app.set_config("--config", "", "Key-value (TOML/INI) file with any of the options below");
  app.require_subcommand(1);

  std::string out_dir = cfg.out_dir.string();
  app.add_option("--task", cfg.task, "Task name")->capture_default_str();
  app.add_option("--template", cfg.template_spec, "Built-in template name or template file");
  app.add_option("--dataset", cfg.dataset, "Line-delimited JSON dataset");
  app.add_option("--train-size", cfg.sizes.train)->capture_default_str();
  app.add_option("--dev-size", cfg.sizes.dev)->capture_default_str();
  app.add_option("--test-size", cfg.sizes.test)->capture_default_str();
  app.add_option("--split-seed", cfg.split_seed)->capture_default_str();
  app.add_option("--seed", cfg.seed, "Collection and sampling seed")->capture_default_str();
  app.add_option("--k", cfg.k, "Shots per prompt (0 = template k_max)")->capture_default_str();
  app.add_option("--num-subsets,--M", cfg.num_subsets, "Subsets to collect (0 = from coverage)");
  app.add_option("--coverage", cfg.coverage)->capture_default_str();
  app.add_option("--backend", cfg.backend, "synthetic or remote")->capture_default_str();
  app.add_option("--model", cfg.model);
  app.add_option("--endpoint", cfg.endpoint);
  app.add_option("--embedding-model", cfg.embedding_model);
  app.add_option("--token-budget", cfg.token_budget)->capture_default_str();
  app.add_option("--max-in-flight", cfg.max_in_flight)->capture_default_str();
  app.add_option("--seeds", cfg.seeds, "Evaluation seeds")->delimiter(',');
  app.add_option("--quality-lo", cfg.quality_lo)->capture_default_str();
  app.add_option("--quality-hi", cfg.quality_hi)->capture_default_str();
  app.add_option("--synthetic-weight", cfg.synthetic_weight)->capture_default_str();
  app.add_option("--position-weights", cfg.position_weights)->delimiter(',');
  app.add_option("--base-accuracy", cfg.base_accuracy)->capture_default_str();
  app.add_option("--noise", cfg.noise)->capture_default_str();
  app.add_option("--lambda", cfg.lambda)->capture_default_str();
  app.add_option("--heldout", cfg.heldout)->capture_default_str();
  app.add_option("--out-dir", out_dir)->capture_default_str();

  std::string out_path;
  std::string splits_path;
  std::string run_path;
  std::string source;
  std::string csv_path;
  std::string sign = "positive";
  std::string method;
  std::string split_name = "test";
  std::string selection;
  std::string table;
  std::string axis = "tokens";
  std::string contrast = "all";
  std::size_t n_examples = 1100;
  std::size_t positions = 4;
  std::size_t pool = 100;
  std::size_t assignments = kDefaultAssignments;
  bool resume = false;
  std::vector<std::string> methods;
  std::vector<std::int64_t> budgets;
  std::vector<std::size_t> ks;

  auto* synth = app.add_subcommand("synth-data", "Write a synthetic dataset for the template");
  synth->add_option("--n", n_examples)->capture_default_str();
  synth->add_option("--out", out_path);

  auto* split = app.add_subcommand("split", "Split a dataset into train/dev/test");
  split->add_option("--out", out_path);

  auto* coll = app.add_subcommand("collect", "Collect the subset run dataset");
  coll->add_option("--splits", splits_path);
  coll->add_option("--out", out_path);
  coll->add_flag("--resume", resume, "Continue an existing run file");

  auto* infl = app.add_subcommand("influence", "Score examples from a run dataset");
  infl->add_option("--run", run_path);
  infl->add_option("--out", out_path);
  infl->add_option("--csv", csv_path);

  auto* dm = app.add_subcommand("datamodel", "Fit the linear datamodel");
  dm->add_option("--run", run_path);
  dm->add_option("--out", out_path);
  dm->add_option("--csv", csv_path);

  auto* sel = app.add_subcommand("select", "Select k examples");
  sel->add_option("--method", method, "influence, datamodel, best_set, random, oneshot, "
                                      "similarity or perplexity")
      ->required();
  sel->add_option("--source", source, "Report, weights, run or ranking file");
  sel->add_option("--sign", sign)->capture_default_str();
  sel->add_option("--splits", splits_path);
  sel->add_option("--out", out_path);

  auto* ev = app.add_subcommand("eval", "Evaluate a selection over the seeds");
  ev->add_option("--selection", selection)->required();
  ev->add_option("--splits", splits_path);
  ev->add_option("--split", split_name)->capture_default_str();
  ev->add_option("--out", out_path);

  auto* base = app.add_subcommand("baselines", "Rank train examples with baseline criteria");
  base->add_option("--methods", methods)->delimiter(',');
  base->add_option("--splits", splits_path);

  auto* agg = app.add_subcommand("aggregate", "Rank-aggregate a method x task accuracy table");
  agg->add_option("--table", table)->required();
  agg->add_option("--sign", sign)->capture_default_str();
  agg->add_option("--out", out_path);

  auto* pos = app.add_subcommand("position-study", "Per-position influence study");
  pos->add_option("--splits", splits_path);
  pos->add_option("--positions", positions)->capture_default_str();
  pos->add_option("--pool", pool)->capture_default_str();
  pos->add_option("--assignments", assignments)->capture_default_str();
  pos->add_option("--contrast", contrast, "all or same")->capture_default_str();

  auto* sw = app.add_subcommand("sweep", "Token-budget or shot-count sweep");
  sw->add_option("--axis", axis, "tokens or shots")->capture_default_str();
  sw->add_option("--run", run_path);
  sw->add_option("--splits", splits_path);
  sw->add_option("--budgets", budgets)->delimiter(',');
  sw->add_option("--ks", ks)->delimiter(',');
  sw->add_option("--methods", methods)->delimiter(',');
  sw->add_option("--split", split_name)->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv{"icinfl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", e.what());
  }
  cfg.out_dir = out_dir;

  Context c{cfg, out, err};
  try {
    fs::create_directories(cfg.out_dir);
    if (synth->parsed()) {
      cmd_synth_data(c, n_examples, out_path);
    } else if (split->parsed()) {
      cmd_split(c, out_path);
    } else if (coll->parsed()) {
      cmd_collect(c, splits_path, out_path, resume);
    } else if (infl->parsed()) {
      cmd_influence(c, run_path, out_path, csv_path);
    } else if (dm->parsed()) {
      cmd_datamodel(c, run_path, out_path, csv_path);
    } else if (sel->parsed()) {
      cmd_select(c, method, source, sign, splits_path, out_path);
    } else if (ev->parsed()) {
      cmd_eval(c, selection, splits_path, split_name, out_path);
    } else if (base->parsed()) {
      if (methods.empty()) methods = {"oneshot", "similarity", "perplexity"};
      cmd_baselines(c, methods, splits_path);
    } else if (agg->parsed()) {
      cmd_aggregate(c, table, sign, out_path);
    } else if (pos->parsed()) {
      cmd_position_study(c, splits_path, positions, pool, assignments, contrast);
    } else if (sw->parsed()) {
      cmd_sweep(c, axis, run_path, splits_path, budgets, ks, methods, split_name);
    }
  } catch (const Error& e) {
    return report_error(err, e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(err, "io", e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", e.what());
  }
  return 0;
}

}  // namespace icinfl::cli
