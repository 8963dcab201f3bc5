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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.h"
#include "json.hpp"

namespace icinfl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("icinfl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  Outcome run_cli(std::vector<std::string> args, const fs::path& where) const {
    std::vector<std::string> full = args;
    const std::vector<std::string> common{"--out-dir",    where.string(), "--k",         "4",
                                          "--train-size", "40",           "--dev-size",  "20",
                                          "--test-size",  "30",           "--num-subsets", "60",
                                          "--seeds",      "1,2,3"};
    full.insert(full.end(), common.begin(), common.end());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(full, out, err);
    return {code, out.str(), err.str()};
  }

  void pipeline(const fs::path& where) const {
    fs::create_directories(where);
    const std::vector<std::vector<std::string>> steps{
        {"synth-data", "--n", "120"},
        {"split", "--dataset", (where / "dataset.jsonl").string()},
        {"collect"},
        {"influence"},
        {"datamodel"},
        {"select", "--method", "influence"},
        {"eval", "--selection", (where / "selection_influence_positive.json").string()},
        {"select", "--method", "datamodel", "--sign", "negative"},
        {"eval", "--selection", (where / "selection_datamodel_negative.json").string()},
    };
    for (const auto& s : steps) {
      const auto r = run_cli(s, where);
      ASSERT_EQ(r.code, 0) << s.front() << ": " << r.err;
      EXPECT_NO_THROW(json::parse(r.out)) << r.out;
    }
  }

  fs::path dir;
};

TEST_F(CliTest, PipelineIsByteIdenticalAcrossRuns) {
  pipeline(dir / "a");
  pipeline(dir / "b");
  for (const char* name : {"influence.csv", "datamodel.csv", "eval_influence_positive_test.csv",
                           "eval_datamodel_negative_test.csv", "run.jsonl"}) {
    const auto a = slurp(dir / "a" / name);
    EXPECT_FALSE(a.empty()) << name;
    EXPECT_EQ(a, slurp(dir / "b" / name)) << name;
  }
}

TEST_F(CliTest, InfluenceIsIdempotent) {
  pipeline(dir);
  const auto first = slurp(dir / "influence.jsonl");
  ASSERT_EQ(run_cli({"influence"}, dir).code, 0);
  EXPECT_EQ(slurp(dir / "influence.jsonl"), first);
}

TEST_F(CliTest, CollectResumeCompletesPartialRun) {
  pipeline(dir);
  const auto full = slurp(dir / "run.jsonl");
  // Keep the header plus ten records.
  std::istringstream in(full);
  std::string partial;
  std::string line;
  for (int i = 0; i < 11 && std::getline(in, line); ++i) partial += line + "\n";
  std::ofstream(dir / "run.jsonl", std::ios::binary) << partial;
  ASSERT_EQ(run_cli({"collect", "--resume"}, dir).code, 0);
  EXPECT_EQ(slurp(dir / "run.jsonl"), full);
}

TEST_F(CliTest, StaleSplitsAreRejected) {
  pipeline(dir);
  ASSERT_EQ(run_cli({"split", "--dataset", (dir / "dataset.jsonl").string(), "--split-seed", "7"},
                    dir)
                .code,
            0);
  const auto r =
      run_cli({"eval", "--selection", (dir / "selection_influence_positive.json").string()}, dir);
  EXPECT_EQ(r.code, 3);
  const auto e = json::parse(r.err);
  EXPECT_EQ(e.at("error").at("kind"), "data");
}

TEST_F(CliTest, ErrorsAreMachineReadable) {
  auto r = run_cli({"influence", "--run", (dir / "missing.jsonl").string()}, dir);
  EXPECT_NE(r.code, 0);
  auto e = json::parse(r.err);
  EXPECT_TRUE(e.at("error").contains("kind"));
  EXPECT_TRUE(e.at("error").contains("message"));

  r = run_cli({"frobnicate"}, dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err).at("error").at("kind"), "usage");

  r = run_cli({"select", "--method", "magic"}, dir);
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, RemoteWithoutKeyIsAConfigError) {
  pipeline(dir);
  ::unsetenv("ICINFL_API_KEY");
  const auto r = run_cli({"collect", "--out", (dir / "remote.jsonl").string(), "--backend",
                          "remote", "--model", "m", "--endpoint", "http://127.0.0.1:9"},
                         dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err).at("error").at("kind"), "config");
  EXPECT_FALSE(fs::exists(dir / "remote.jsonl"));
}

TEST_F(CliTest, ConfigFileSuppliesOptions) {
  const auto cfg = dir / "settings.ini";
  std::ofstream(cfg) << "train-size = 50\ndev-size = 10\ntest-size = 20\n";
  std::ostringstream out;
  std::ostringstream err;
  ASSERT_EQ(run({"synth-data", "--n", "100", "--out-dir", dir.string()}, out, err), 0) << err.str();
  out.str("");
  ASSERT_EQ(run({"split", "--config", cfg.string(), "--out-dir", dir.string(), "--dataset",
                 (dir / "dataset.jsonl").string()},
                out, err),
            0)
      << err.str();
  const auto j = json::parse(out.str());
  EXPECT_EQ(j.at("train"), 50);
  EXPECT_EQ(j.at("dev"), 10);
  EXPECT_EQ(j.at("test"), 20);
}

TEST_F(CliTest, BaselinesAndAggregate) {
  pipeline(dir);
  ASSERT_EQ(run_cli({"baselines"}, dir).code, 0);
  for (const char* m : {"oneshot", "similarity", "perplexity"}) {
    EXPECT_TRUE(fs::exists(dir / (std::string("ranking_") + m + ".csv"))) << m;
  }
  ASSERT_EQ(run_cli({"select", "--method", "perplexity"}, dir).code, 0);
  std::ofstream(dir / "table.csv") << "method,task,accuracy\na,t1,0.9\nb,t1,0.5\na,t2,0.8\nb,t2,0.7\n";
  const auto r = run_cli({"aggregate", "--table", (dir / "table.csv").string()}, dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "aggregate.csv"));
}

TEST_F(CliTest, PositionStudyAndSweeps) {
  pipeline(dir);
  auto r = run_cli({"position-study", "--positions", "3", "--pool", "12", "--assignments", "2"},
                   dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "positional_pairs.csv"));
  r = run_cli({"sweep", "--axis", "tokens", "--budgets", "1000,100000000", "--methods",
               "influence,random"},
              dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "sweep_tokens.csv").rfind("tokens,method,mean,stderr", 0), 0u);
  r = run_cli({"sweep", "--axis", "shots", "--ks", "1,2,4", "--methods", "influence"}, dir);
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli({"sweep", "--axis", "sideways", "--ks", "1"}, dir);
  EXPECT_EQ(r.code, 2);
}

}  // namespace
}  // namespace icinfl::cli
