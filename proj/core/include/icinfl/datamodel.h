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

#ifndef ICINFL_DATAMODEL_H_
#define ICINFL_DATAMODEL_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "icinfl/collector.h"
#include "icinfl/influence.h"

namespace icinfl {

// Minimizes (1/(2n)) * ||y - X theta - theta0||^2 + lambda * ||theta||_1 by
// cyclic coordinate descent. The intercept is not penalized.
struct LassoOptions {
  double lambda = 1e-4;
  double tolerance = 1e-7;  // on the largest coordinate change in a sweep
  int max_sweeps = 10000;
  bool fit_intercept = true;
};

struct LassoResult {
  Eigen::VectorXd theta;
  double theta0 = 0.0;
  bool converged = false;
  int sweeps = 0;
};

LassoResult fit_lasso(const Eigen::SparseMatrix<double>& x, const Eigen::VectorXd& y,
                      const LassoOptions& options);

double lasso_objective(const Eigen::SparseMatrix<double>& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& theta, double theta0, double lambda);

// Gradient of the smooth part with respect to theta, for optimality checks.
Eigen::VectorXd lasso_gradient(const Eigen::SparseMatrix<double>& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& theta, double theta0);

// Linear surrogate g(S) = theta0 + sum_{j in S} theta_j.
struct DatamodelWeights {
  std::map<ExampleId, double> theta;
  double theta0 = 0.0;
  double lambda = 0.0;
  std::size_t train_record_count = 0;
  bool converged = false;
  int sweeps = 0;

  std::string task;
  Provenance inputs;
};

struct DatamodelFit {
  DatamodelWeights weights;
  std::vector<SubsetRecord> heldout;
};

inline constexpr double kDefaultLambda = 1e-4;
inline constexpr double kDefaultHeldoutFraction = 0.1;

// Holds out round(heldout_fraction * M) records chosen uniformly at random
// and fits on the rest.
DatamodelFit fit_datamodel(const RunDataset& run, double lambda = kDefaultLambda,
                           double heldout_fraction = kDefaultHeldoutFraction,
                           std::uint64_t seed = kDefaultSeed);

// Binary indicator design over `universe` (column j is universe[j]).
Eigen::SparseMatrix<double> indicator_matrix(std::span<const SubsetRecord> records,
                                             std::span<const ExampleId> universe);

double predict(const DatamodelWeights& weights, std::span<const ExampleId> subset_ids);

struct CorrelationReport {
  double pearson_rho = 0.0;
  std::size_t n_heldout = 0;
  double mse = 0.0;
};

CorrelationReport heldout_correlation(const DatamodelWeights& weights,
                                      std::span<const SubsetRecord> heldout);

// Same contract as select_examples, ranking by theta. An all-zero theta
// falls back to id order and adds a warning.
std::vector<ExampleId> datamodel_select(const DatamodelWeights& weights, std::size_t k,
                                        Sign sign, std::vector<std::string>* warnings = nullptr);

void write_weights(std::ostream& out, const DatamodelWeights& weights);
void save_weights(const std::filesystem::path& path, const DatamodelWeights& weights);
DatamodelWeights parse_weights(std::istream& in);
DatamodelWeights load_weights(const std::filesystem::path& path);

}  // namespace icinfl

#endif  // ICINFL_DATAMODEL_H_
