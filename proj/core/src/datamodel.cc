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

#include "icinfl/datamodel.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <fmt/format.h>

#include "icinfl/error.h"
#include "icinfl/stats.h"
#include "json.hpp"

namespace icinfl {

using nlohmann::json;

namespace {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

}  // namespace

LassoResult fit_lasso(const Eigen::SparseMatrix<double>& x, const Eigen::VectorXd& y,
                      const LassoOptions& options) {
  if (!(options.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (x.rows() != y.size()) throw DataError("design and response sizes differ");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n == 0) throw DataError("lasso needs at least one row");
  const double inv_n = 1.0 / static_cast<double>(n);

  LassoResult res;
  res.theta = Eigen::VectorXd::Zero(p);
  res.theta0 = options.fit_intercept ? y.mean() : 0.0;
  Eigen::VectorXd r = y.array() - res.theta0;

  Eigen::VectorXd col_sq(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(x, j); it; ++it) s += it.value() * it.value();
    col_sq[j] = s * inv_n;
  }

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    if (options.fit_intercept) {
      const double delta = r.mean();
      res.theta0 += delta;
      r.array() -= delta;
      max_change = std::abs(delta);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double old = res.theta[j];
      double rho = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(x, j); it; ++it) {
        rho += it.value() * r[it.index()];
      }
      rho = rho * inv_n + col_sq[j] * old;
      const double updated = soft_threshold(rho, options.lambda) / col_sq[j];
      const double delta = updated - old;
      if (delta != 0.0) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(x, j); it; ++it) {
          r[it.index()] -= it.value() * delta;
        }
        res.theta[j] = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    res.sweeps = sweep;
    if (max_change < options.tolerance) {
      res.converged = true;
      break;
    }
  }
  return res;
}

double lasso_objective(const Eigen::SparseMatrix<double>& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& theta, double theta0, double lambda) {
  const Eigen::VectorXd r = (y - x * theta).array() - theta0;
  return 0.5 * r.squaredNorm() / static_cast<double>(y.size()) + lambda * theta.lpNorm<1>();
}

Eigen::VectorXd lasso_gradient(const Eigen::SparseMatrix<double>& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& theta, double theta0) {
  const Eigen::VectorXd r = (y - x * theta).array() - theta0;
  return -(x.transpose() * r) / static_cast<double>(y.size());
}

Eigen::SparseMatrix<double> indicator_matrix(std::span<const SubsetRecord> records,
                                             std::span<const ExampleId> universe) {
  std::unordered_map<ExampleId, int> col;
  col.reserve(universe.size());
  for (std::size_t j = 0; j < universe.size(); ++j) col[universe[j]] = static_cast<int>(j);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (ExampleId id : records[i].subset_ids) {
      const auto it = col.find(id);
      if (it == col.end()) throw DataError(fmt::format("id {} is outside the universe", id));
      triplets.emplace_back(static_cast<int>(i), it->second, 1.0);
    }
  }
  Eigen::SparseMatrix<double> x(static_cast<Eigen::Index>(records.size()),
                                static_cast<Eigen::Index>(universe.size()));
  x.setFromTriplets(triplets.begin(), triplets.end());
  return x;
}

DatamodelFit fit_datamodel(const RunDataset& run, double lambda, double heldout_fraction,
                           std::uint64_t seed) {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (!(heldout_fraction >= 0.0 && heldout_fraction < 1.0)) {
    throw ConfigError("heldout fraction must be in [0, 1)");
  }
  const std::size_t m = run.records.size();
  const auto n_hold = static_cast<std::size_t>(std::lround(heldout_fraction * static_cast<double>(m)));
  if (m < n_hold + 2) {
    throw DataError(fmt::format("{} records leave fewer than 2 for fitting", m));
  }

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  Rng rng(hash_words({seed, hash_string("holdout")}));
  auto held = rng.sample(std::span<const std::size_t>(order), n_hold);
  std::vector<char> is_held(m, 0);
  for (std::size_t i : held) is_held[i] = 1;

  DatamodelFit fit;
  std::vector<SubsetRecord> train;
  train.reserve(m - n_hold);
  for (std::size_t i = 0; i < m; ++i) {
    if (is_held[i]) {
      fit.heldout.push_back(run.records[i]);
    } else {
      train.push_back(run.records[i]);
    }
  }

  const auto x = indicator_matrix(train, run.train_ids);
  Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) y[static_cast<Eigen::Index>(i)] = train[i].metric;
  LassoOptions opts;
  opts.lambda = lambda;
  const auto res = fit_lasso(x, y, opts);

  auto& w = fit.weights;
  for (std::size_t j = 0; j < run.train_ids.size(); ++j) {
    w.theta[run.train_ids[j]] = res.theta[static_cast<Eigen::Index>(j)];
  }
  w.theta0 = res.theta0;
  w.lambda = lambda;
  w.train_record_count = train.size();
  w.converged = res.converged;
  w.sweeps = res.sweeps;
  w.task = run.task;
  w.inputs = run.inputs;
  return fit;
}

double predict(const DatamodelWeights& weights, std::span<const ExampleId> subset_ids) {
  double g = weights.theta0;
  for (ExampleId id : subset_ids) {
    const auto it = weights.theta.find(id);
    if (it == weights.theta.end()) throw DataError(fmt::format("unknown id {}", id));
    g += it->second;
  }
  return g;
}

CorrelationReport heldout_correlation(const DatamodelWeights& weights,
                                      std::span<const SubsetRecord> heldout) {
  if (heldout.size() < 2) throw DataError("correlation undefined: fewer than 2 heldout records");
  std::vector<double> pred;
  std::vector<double> actual;
  double sq = 0.0;
  for (const auto& rec : heldout) {
    pred.push_back(predict(weights, rec.subset_ids));
    actual.push_back(rec.metric);
    sq += (pred.back() - actual.back()) * (pred.back() - actual.back());
  }
  CorrelationReport out;
  out.pearson_rho = stats::pearson(pred, actual);
  out.n_heldout = heldout.size();
  out.mse = sq / static_cast<double>(heldout.size());
  return out;
}

std::vector<ExampleId> datamodel_select(const DatamodelWeights& weights, std::size_t k,
                                        Sign sign, std::vector<std::string>* warnings) {
  if (k > weights.theta.size()) {
    throw ConfigError(
        fmt::format("cannot select {} examples from {} weights", k, weights.theta.size()));
  }
  const bool degenerate = std::all_of(weights.theta.begin(), weights.theta.end(),
                                      [](const auto& kv) { return kv.second == 0.0; });
  if (degenerate && warnings != nullptr) {
    warnings->push_back("all datamodel weights are zero; selection falls back to id order");
  }
  auto ranked = rank_by_score(weights.theta, sign);
  ranked.resize(k);
  return ranked;
}

void write_weights(std::ostream& out, const DatamodelWeights& weights) {
  json header = {{"type", "datamodel"},
                 {"task", weights.task},
                 {"lambda", weights.lambda},
                 {"theta0", weights.theta0},
                 {"converged", weights.converged},
                 {"sweeps", weights.sweeps},
                 {"train_records", weights.train_record_count},
                 {"inputs", weights.inputs}};
  out << header.dump() << '\n';
  for (const auto& [id, t] : weights.theta) {
    out << json{{"id", id}, {"theta", t}}.dump() << '\n';
  }
}

void save_weights(const std::filesystem::path& path, const DatamodelWeights& weights) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_weights(out, weights);
}

DatamodelWeights parse_weights(std::istream& in) {
  DatamodelWeights w;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      if (!have_header) {
        if (j.value("type", "") != "datamodel") throw DataError("not a datamodel weights file");
        w.task = j.at("task").get<std::string>();
        w.lambda = j.at("lambda").get<double>();
        w.theta0 = j.at("theta0").get<double>();
        w.converged = j.at("converged").get<bool>();
        w.sweeps = j.at("sweeps").get<int>();
        w.train_record_count = j.at("train_records").get<std::size_t>();
        w.inputs = j.at("inputs").get<Provenance>();
        have_header = true;
        continue;
      }
      w.theta[j.at("id").get<ExampleId>()] = j.at("theta").get<double>();
    } catch (const json::exception& e) {
      throw DataError(fmt::format("malformed weights line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw DataError("weights file is empty");
  return w;
}

DatamodelWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_weights(in);
}

}  // namespace icinfl
