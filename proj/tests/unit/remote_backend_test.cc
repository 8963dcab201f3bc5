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

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "httplib.h"
#include "icinfl/error.h"
#include "icinfl/remote_backend.h"
#include "json.hpp"

namespace icinfl {
namespace {

using nlohmann::json;

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Minimal completions server: one token per whitespace word, the first
// token without a logprob, "yes" -> -1, "please" -> -2, anything else -0.5.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      const int now = ++active_;
      {
        std::lock_guard lock(mu_);
        max_active_ = std::max(max_active_, now);
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_.load()));
      --active_;
      if (req.get_header_value("Authorization") != "Bearer secret") {
        res.status = 401;
        return;
      }
      if (fail_next_ > 0) {
        --fail_next_;
        res.status = fail_status_;
        return;
      }
      const auto body = json::parse(req.body);
      EXPECT_EQ(body.at("max_tokens"), 0);
      EXPECT_EQ(body.at("echo"), true);
      EXPECT_EQ(body.at("logprobs"), 1);
      json lps = json::array();
      const auto toks = words(body.at("prompt").get<std::string>());
      for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i == 0) {
          lps.push_back(nullptr);
        } else if (toks[i] == "yes") {
          lps.push_back(-1.0);
        } else if (toks[i] == "please") {
          lps.push_back(-2.0);
        } else {
          lps.push_back(-0.5);
        }
      }
      json out = {{"choices", {{{"logprobs", {{"token_logprobs", lps}, {"tokens", toks}}}}}}};
      res.set_content(out.dump(), "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"data":[{"embedding":[3.0,4.0]}]})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> requests_{0};
  std::atomic<int> fail_next_{0};
  std::atomic<int> fail_status_{503};
  std::atomic<int> delay_ms_{0};
  int max_active() {
    std::lock_guard lock(mu_);
    return max_active_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> active_{0};
  std::mutex mu_;
  int max_active_ = 0;
};

class RemoteTest : public ::testing::Test {
 protected:
  RemoteConfig config(int in_flight = 1) {
    RemoteConfig c;
    c.endpoint = server.endpoint();
    c.model = "test-model";
    c.api_key = "secret";
    c.max_in_flight = in_flight;
    c.timeout = std::chrono::seconds(10);
    return c;
  }
  std::unique_ptr<RemoteBackend> make(int in_flight = 1) {
    auto b = std::make_unique<RemoteBackend>(config(in_flight));
    b->set_sleeper([this](std::chrono::milliseconds d) {
      std::lock_guard lock(sleep_mu);
      sleeps.push_back(d);
    });
    return b;
  }
  static PromptSpec prompt(std::string text, std::vector<std::string> continuations) {
    PromptSpec p;
    p.text = std::move(text);
    p.continuations = std::move(continuations);
    return p;
  }

  FakeServer server;
  std::mutex sleep_mu;
  std::vector<std::chrono::milliseconds> sleeps;
};

TEST_F(RemoteTest, ContinuationLogprobIsSumOfTrailingSpan) {
  auto b = make();
  const auto p = prompt("Question: ok Answer:", {" yes please", " no"});
  const auto s = b->score_continuation(p, 0);
  EXPECT_DOUBLE_EQ(s.logprob_sum, -3.0);
  EXPECT_EQ(s.token_count, 2);
  EXPECT_EQ(s.context_token_count, 3);
  EXPECT_EQ(b->classify(p), 1u);  // " no" scores -0.5
}

TEST_F(RemoteTest, PromptTokenCountIsCached) {
  auto b = make();
  const auto p = prompt("a b c", {" yes", " no"});
  b->score_all(p);
  EXPECT_EQ(server.requests_.load(), 3);  // one prompt echo plus one per choice
}

TEST_F(RemoteTest, TokenLogprobsSkipFirstToken) {
  auto b = make();
  const auto lps = b->token_logprobs("start yes please");
  EXPECT_EQ(lps, (std::vector<double>{-1.0, -2.0}));
  EXPECT_NEAR(b->perplexity("start yes please"), std::exp(1.5), 1e-12);
}

TEST_F(RemoteTest, RetriesTransientFailuresWithBackoff) {
  auto b = make();
  server.fail_next_ = 2;
  server.fail_status_ = 503;
  const auto r = b->echo("x yes");
  EXPECT_EQ(r.token_count(), 2);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000),
                                                            std::chrono::milliseconds(2000)}));
}

TEST_F(RemoteTest, RateLimitIsRetried) {
  auto b = make();
  server.fail_next_ = 1;
  server.fail_status_ = 429;
  EXPECT_NO_THROW(b->echo("x"));
  EXPECT_EQ(sleeps.size(), 1u);
}

TEST_F(RemoteTest, GivesUpAfterFiveAttempts) {
  auto b = make();
  server.fail_next_ = 100;
  server.fail_status_ = 500;
  try {
    b->echo("x");
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_EQ(server.requests_.load(), 5);
  EXPECT_EQ(sleeps.size(), 4u);
  EXPECT_EQ(sleeps.back(), std::chrono::milliseconds(8000));
}

TEST_F(RemoteTest, ClientErrorsAreNotRetried) {
  auto b = make();
  server.fail_next_ = 1;
  server.fail_status_ = 400;
  EXPECT_THROW(b->echo("x"), BackendError);
  EXPECT_EQ(server.requests_.load(), 1);
  EXPECT_TRUE(sleeps.empty());
}

TEST_F(RemoteTest, InFlightCapIsRespected) {
  auto b = make(2);
  server.delay_ms_ = 30;
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { b->echo("a b"); });
  for (auto& t : threads) t.join();
  EXPECT_LE(server.max_active(), 2);
  EXPECT_GE(server.max_active(), 1);
}

TEST_F(RemoteTest, OverflowBeforeContinuation) {
  auto c = config();
  c.token_budget = 3;
  RemoteBackend b(c);
  EXPECT_THROW(b.score_continuation(prompt("a b c d", {" yes"}), 0), OverflowError);
  EXPECT_THROW(b.score_continuation(prompt("a b", {" yes please"}), 0), OverflowError);
}

TEST_F(RemoteTest, EmbeddingIsNormalized) {
  auto b = make();
  const auto v = b->embed("text");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  EXPECT_DOUBLE_EQ(v[1], 0.8);
}

TEST(RemoteConfigTest, MissingKeyIsAConfigError) {
  ::unsetenv(kApiKeyEnv);
  RemoteConfig c;
  c.endpoint = "http://127.0.0.1:9";
  c.model = "m";
  EXPECT_THROW(resolve_remote_config(c), ConfigError);
  EXPECT_THROW(RemoteBackend{c}, ConfigError);
}

TEST(RemoteConfigTest, EnvironmentOverrides) {
  ::setenv(kApiKeyEnv, "k", 1);
  ::setenv(kEndpointEnv, "http://example.invalid:1", 1);
  RemoteConfig c;
  c.endpoint = "http://127.0.0.1:9";
  c.model = "m";
  const auto r = resolve_remote_config(c);
  EXPECT_EQ(r.api_key, "k");
  EXPECT_EQ(r.endpoint, "http://example.invalid:1");
  ::unsetenv(kApiKeyEnv);
  ::unsetenv(kEndpointEnv);
}

TEST(RetryPolicyTest, ExponentialDelays) {
  RetryPolicy p;
  EXPECT_EQ(p.delay_before(0), std::chrono::milliseconds(0));
  EXPECT_EQ(p.delay_before(1), std::chrono::milliseconds(1000));
  EXPECT_EQ(p.delay_before(3), std::chrono::milliseconds(4000));
}

}  // namespace
}  // namespace icinfl
