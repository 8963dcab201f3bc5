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

#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "icinfl/collector.h"
#include "icinfl/datamodel.h"
#include "icinfl/error.h"
#include "icinfl/influence.h"
#include "icinfl/synthetic_backend.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace icinfl {
namespace {

Eigen::SparseMatrix<double> random_binary(int rows, int cols, double density, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution on(density);
  Eigen::MatrixXd dense(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) dense(i, j) = on(gen) ? 1.0 : 0.0;
  }
  return dense.sparseView();
}

TEST(Lasso, ZeroPenaltyRecoversExactLinearModel) {
  const auto x = random_binary(20, 3, 0.5, 3);
  const Eigen::Vector3d truth(0.2, -0.1, 0.05);
  const Eigen::VectorXd y = x * truth + Eigen::VectorXd::Constant(20, 0.4);
  LassoOptions o;
  o.lambda = 0.0;
  o.tolerance = 1e-12;
  o.max_sweeps = 100000;
  const auto r = fit_lasso(x, y, o);
  EXPECT_TRUE(r.converged);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.theta[j], truth[j], 1e-6);
  EXPECT_NEAR(r.theta0, 0.4, 1e-6);
  const auto ls = testing::least_squares(Eigen::MatrixXd(x), y);
  EXPECT_NEAR((r.theta - ls.theta).norm(), 0.0, 1e-6);
}

TEST(Lasso, HugePenaltyShrinksToMean) {
  const auto x = random_binary(30, 5, 0.4, 4);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) y[i] = 0.1 * (i % 7);
  LassoOptions o;
  o.lambda = 1e6;
  const auto r = fit_lasso(x, y, o);
  EXPECT_TRUE(r.theta.isZero(0.0));
  EXPECT_NEAR(r.theta0, y.mean(), 1e-12);
}

TEST(Lasso, MatchesProximalGradientReference) {
  const auto x = random_binary(200, 8, 0.5, 5);
  std::mt19937_64 gen(6);
  std::normal_distribution<double> noise(0.0, 0.02);
  Eigen::VectorXd truth(8);
  truth << 0.05, -0.03, 0.0, 0.02, 0.0, -0.01, 0.04, 0.0;
  Eigen::VectorXd y = x * truth;
  for (int i = 0; i < 200; ++i) y[i] += 0.5 + noise(gen);
  LassoOptions o;
  o.lambda = 1e-4;
  const auto r = fit_lasso(x, y, o);
  ASSERT_TRUE(r.converged);
  const auto ref = testing::fista_lasso(Eigen::MatrixXd(x), y, 1e-4);
  const double ours = lasso_objective(x, y, r.theta, r.theta0, 1e-4);
  const double theirs = lasso_objective(x, y, ref.theta, ref.theta0, 1e-4);
  EXPECT_NEAR(ours, theirs, 1e-6);
  EXPECT_LE(ours, theirs + 1e-9);
}

TEST(Lasso, SatisfiesOptimalityConditions) {
  const auto x = random_binary(150, 12, 0.3, 8);
  Eigen::VectorXd y(150);
  for (int i = 0; i < 150; ++i) y[i] = std::sin(0.37 * i);
  const double lambda = 0.01;
  LassoOptions o;
  o.lambda = lambda;
  o.tolerance = 1e-10;
  const auto r = fit_lasso(x, y, o);
  const Eigen::VectorXd g = lasso_gradient(x, y, r.theta, r.theta0);
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (r.theta[j] != 0.0) {
      EXPECT_NEAR(g[j], -lambda * (r.theta[j] > 0 ? 1.0 : -1.0), 1e-6) << j;
    } else {
      EXPECT_LE(std::abs(g[j]), lambda + 1e-6) << j;
    }
  }
}

TEST(Lasso, RejectsBadInput) {
  const auto x = random_binary(4, 2, 0.5, 1);
  LassoOptions o;
  o.lambda = -1.0;
  EXPECT_THROW(fit_lasso(x, Eigen::VectorXd::Zero(4), o), ConfigError);
  EXPECT_THROW(fit_lasso(x, Eigen::VectorXd::Zero(3), LassoOptions{}), DataError);
}

TEST(Lasso, ReportsNonConvergence) {
  const auto x = random_binary(50, 10, 0.5, 2);
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) y[i] = 0.01 * i;
  LassoOptions o;
  o.lambda = 0.0;
  o.tolerance = 0.0;
  o.max_sweeps = 2;
  const auto r = fit_lasso(x, y, o);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.sweeps, 2);
}

DatamodelWeights weights_of(std::map<ExampleId, double> theta, double theta0) {
  DatamodelWeights w;
  w.theta = std::move(theta);
  w.theta0 = theta0;
  return w;
}

TEST(Predict, LinearSurrogate) {
  const auto w = weights_of({{0, 0.1}, {1, -0.05}}, 0.5);
  const std::vector<ExampleId> both{0, 1};
  EXPECT_NEAR(predict(w, both), 0.55, 1e-15);
  EXPECT_DOUBLE_EQ(predict(w, std::vector<ExampleId>{}), 0.5);
  EXPECT_THROW(predict(w, std::vector<ExampleId>{7}), DataError);
}

SubsetRecord rec(std::vector<ExampleId> ids, double metric) {
  SubsetRecord r;
  r.subset_ids = ids;
  r.ordering = std::move(ids);
  r.metric = metric;
  r.n_dev = 1;
  return r;
}

TEST(Correlation, PerfectAndInverse) {
  const auto w = weights_of({{0, 0.1}, {1, -0.2}, {2, 0.3}}, 0.4);
  std::vector<SubsetRecord> exact;
  std::vector<SubsetRecord> inverse;
  for (const std::vector<ExampleId>& s : {std::vector<ExampleId>{0}, {1}, {2}, {0, 2}}) {
    const double p = predict(w, s);
    exact.push_back(rec(s, p));
    inverse.push_back(rec(s, 3.0 - 2.0 * p));
  }
  const auto a = heldout_correlation(w, exact);
  EXPECT_NEAR(a.pearson_rho, 1.0, 1e-12);
  EXPECT_NEAR(a.mse, 0.0, 1e-24);
  EXPECT_EQ(a.n_heldout, 4u);
  EXPECT_NEAR(heldout_correlation(w, inverse).pearson_rho, -1.0, 1e-12);

  std::vector<SubsetRecord> flat{rec({0}, 0.5), rec({1}, 0.5)};
  try {
    heldout_correlation(w, flat);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("correlation undefined"), std::string::npos);
  }
  EXPECT_THROW(heldout_correlation(w, std::vector<SubsetRecord>{rec({0}, 0.1)}), DataError);
}

TEST(DatamodelSelect, SignsAndDegenerateFallback) {
  const auto w = weights_of({{0, 0.2}, {1, 0.1}, {2, -0.3}}, 0.0);
  EXPECT_EQ(datamodel_select(w, 1, Sign::kPositive), (std::vector<ExampleId>{0}));
  EXPECT_EQ(datamodel_select(w, 1, Sign::kNegative), (std::vector<ExampleId>{2}));
  const auto zero = weights_of({{4, 0.0}, {2, 0.0}, {9, 0.0}}, 0.5);
  std::vector<std::string> warnings;
  EXPECT_EQ(datamodel_select(zero, 2, Sign::kPositive, &warnings), (std::vector<ExampleId>{2, 4}));
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_THROW(datamodel_select(w, 4, Sign::kPositive), ConfigError);
}

TEST(Weights, RoundTrip) {
  auto w = weights_of({{0, 0.25}, {3, -1e-9}, {8, 0.0}}, 0.625);
  w.lambda = 1e-4;
  w.train_record_count = 90;
  w.converged = true;
  w.sweeps = 17;
  w.task = "sst2";
  w.inputs["run"] = "abc";
  std::stringstream io;
  write_weights(io, w);
  const auto back = parse_weights(io);
  EXPECT_EQ(back.theta, w.theta);
  EXPECT_EQ(back.theta0, w.theta0);
  EXPECT_EQ(back.lambda, w.lambda);
  EXPECT_EQ(back.train_record_count, 90u);
  EXPECT_TRUE(back.converged);
  EXPECT_EQ(back.sweeps, 17);
  EXPECT_EQ(back.inputs, w.inputs);
  const auto path = std::filesystem::temp_directory_path() / "icinfl_weights_rt.jsonl";
  save_weights(path, w);
  EXPECT_EQ(load_weights(path).theta, w.theta);
  std::filesystem::remove(path);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  Eigen::Map<const Eigen::VectorXd> x(a.data(), static_cast<Eigen::Index>(a.size()));
  Eigen::Map<const Eigen::VectorXd> y(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  return xc.dot(yc) / (xc.norm() * yc.norm());
}

class PlantedDatamodel : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto splits = testing::synthetic_splits(40, 100, 4);
    const SplitIndex index(splits);
    SyntheticBackend b(testing::oracle_config(splits, -0.05, 0.05, std::vector<double>(8, 2.0),
                                              false, 3),
                       splits);
    CollectOptions o;
    o.task = "synthetic";
    o.k = 8;
    o.num_subsets = default_subset_count(40, 8);
    run_ = new RunDataset(collect(index, o, b, testing::synthetic_template()).run);
  }
  static void TearDownTestSuite() { delete run_; }
  static RunDataset* run_;
};
RunDataset* PlantedDatamodel::run_ = nullptr;

TEST_F(PlantedDatamodel, HoldoutSizeAndDeterminism) {
  const auto fit = fit_datamodel(*run_);
  EXPECT_EQ(fit.heldout.size(), 15u);
  EXPECT_EQ(fit.weights.train_record_count, 135u);
  EXPECT_EQ(fit.weights.theta.size(), 40u);
  const auto again = fit_datamodel(*run_);
  EXPECT_EQ(again.weights.theta, fit.weights.theta);
  EXPECT_EQ(again.heldout, fit.heldout);
  EXPECT_NE(fit_datamodel(*run_, kDefaultLambda, 0.1, 7).heldout, fit.heldout);
}

TEST_F(PlantedDatamodel, AgreesWithInfluenceRanking) {
  const auto fit = fit_datamodel(*run_, kDefaultLambda, 0.0);
  const auto report = influence_scores(*run_);
  std::vector<double> theta;
  std::vector<double> infl;
  for (const auto& [id, s] : report.scores) {
    theta.push_back(fit.weights.theta.at(id));
    infl.push_back(s);
  }
  EXPECT_GE(pearson(ranks(theta), ranks(infl)), 0.9);
}

TEST_F(PlantedDatamodel, HeldoutCorrelationIsHigh) {
  const auto fit = fit_datamodel(*run_);
  EXPECT_GE(heldout_correlation(fit.weights, fit.heldout).pearson_rho, 0.9);
}

TEST_F(PlantedDatamodel, RejectsBadSettings) {
  EXPECT_THROW(fit_datamodel(*run_, -1.0), ConfigError);
  EXPECT_THROW(fit_datamodel(*run_, kDefaultLambda, 1.0), ConfigError);
  auto tiny = *run_;
  tiny.records.resize(2);
  EXPECT_THROW(fit_datamodel(tiny, kDefaultLambda, 0.5), DataError);
}

}  // namespace
}  // namespace icinfl
