// Copyright 2026 The textpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "test_support.hpp"
#include "textpos/cache_store.hpp"
#include "textpos/delimited.hpp"
#include "textpos/errors.hpp"
#include "textpos/http_backend.hpp"
#include "textpos/prompting.hpp"

namespace textpos {
namespace {

constexpr const char* kKeyVar = "TEXTPOS_TEST_API_KEY";
constexpr const char* kSecret = "sk-test-0123456789abcdef";

// Local chat-completion server answering from a queue of (status, body).
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      requests_.push_back(req.body);
      auth_.push_back(req.get_header_value("Authorization"));
      int status = 200;
      std::string body = R"({"choices":[{"message":{"role":"assistant","content":"{\"Score\": 42}"}}],)"
                         R"("usage":{"prompt_tokens":100,"completion_tokens":6,"total_tokens":106}})";
      if (!script_.empty()) {
        std::tie(status, body) = script_.front();
        script_.erase(script_.begin());
      }
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  void script(std::vector<std::pair<int, std::string>> s) {
    std::lock_guard lock(mu_);
    script_ = std::move(s);
  }
  std::vector<std::string> requests() {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::vector<std::string> auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::vector<std::pair<int, std::string>> script_;
  std::vector<std::string> requests_;
  std::vector<std::string> auth_;
};

HttpBackendConfig config_for(const FakeServer& server, ApiStyle style = ApiStyle::kOpenAi) {
  ::setenv(kKeyVar, kSecret, 1);
  HttpBackendConfig c;
  c.style = style;
  c.base_url = server.url();
  c.api_key_env = kKeyVar;
  c.timeout = std::chrono::seconds(5);
  c.options.requests_per_minute = 0;
  c.options.sleep = [](std::chrono::milliseconds) {};
  return c;
}

BackendRequest tweet_request(const std::string& text) {
  BackendRequest r;
  r.model_id = "gpt-4-test";
  r.message = render_prompt(get_preset("tweet_left_right"), text);
  return r;
}

TEST(HttpBackend, SuccessfulCallSendsTheDecodingContract) {
  FakeServer server;
  HttpBackend backend(config_for(server));
  const auto r = backend.submit(tweet_request("We need tax cuts"));
  EXPECT_EQ(r.body, R"({"Score": 42})");
  EXPECT_EQ(r.transport_meta.at("status"), 200);
  EXPECT_EQ(r.transport_meta.at("usage").at("completion_tokens"), 6);

  const auto sent = nlohmann::json::parse(server.requests().at(0));
  EXPECT_EQ(sent.at("model"), "gpt-4-test");
  EXPECT_EQ(sent.at("temperature"), 0);
  EXPECT_EQ(sent.at("top_p"), 1);
  EXPECT_EQ(sent.at("n"), 1);
  EXPECT_EQ(sent.at("max_tokens"), 20);
  EXPECT_EQ(sent.at("response_format").at("type"), "json_object");
  EXPECT_EQ(sent.at("messages").at(0).at("role"), "user");
  EXPECT_EQ(sent.at("messages").at(0).at("content"), tweet_request("We need tax cuts").message.content);
  EXPECT_EQ(server.auth().at(0), std::string("Bearer ") + kSecret);
}

TEST(HttpBackend, RateLimitedThenSuccess) {
  FakeServer server;
  server.script({{429, R"({"error":{"message":"slow down"}})"}});
  HttpBackend backend(config_for(server));
  const auto r = backend.submit(tweet_request("x"));
  EXPECT_EQ(r.transport_meta.at("retries"), 1);
  EXPECT_EQ(server.requests().size(), 2u);
}

TEST(HttpBackend, InvalidCredentialIsNotRetried) {
  FakeServer server;
  server.script({{401, R"({"error":{"message":"invalid api key"}})"}});
  HttpBackend backend(config_for(server));
  try {
    backend.submit(tweet_request("x"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), FailureKind::kAuth);
    EXPECT_NE(std::string(e.what()).find("invalid api key"), std::string::npos);
    EXPECT_EQ(std::string(e.what()).find(kSecret), std::string::npos);
  }
  EXPECT_EQ(server.requests().size(), 1u);
}

TEST(HttpBackend, UnknownModelIsPermanent) {
  FakeServer server;
  server.script({{404, R"({"error":{"message":"model not found"}})"}});
  HttpBackend backend(config_for(server));
  EXPECT_THROW(backend.submit(tweet_request("x")), BackendError);
  EXPECT_EQ(server.requests().size(), 1u);
}

TEST(HttpBackend, ServerErrorsExhaustTheBudget) {
  FakeServer server;
  server.script({{503, "down"}, {503, "down"}, {503, "down"}});
  auto c = config_for(server);
  c.options.retry.max_attempts = 3;
  HttpBackend backend(c);
  try {
    backend.submit(tweet_request("x"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.attempts(), 3);
  }
}

TEST(HttpBackend, ConnectionRefusedIsTransient) {
  std::string url;
  {
    FakeServer server;
    url = server.url();
  }
  HttpBackendConfig c;
  c.base_url = url;
  c.timeout = std::chrono::seconds(2);
  c.options.requests_per_minute = 0;
  c.options.sleep = [](std::chrono::milliseconds) {};
  c.options.retry.max_attempts = 2;
  HttpBackend backend(c);
  try {
    backend.submit(tweet_request("x"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.attempts(), 2);
  }
}

TEST(HttpBackend, LegacyStyleDropsJsonModeMistralDropsN) {
  FakeServer server;
  HttpBackend legacy(config_for(server, ApiStyle::kOpenAiLegacy));
  const auto r = legacy.submit(tweet_request("x"));
  EXPECT_EQ(r.transport_meta.at("params").at("json_mode"), false);
  EXPECT_FALSE(nlohmann::json::parse(server.requests().at(0)).contains("response_format"));

  HttpBackend mistral(config_for(server, ApiStyle::kMistral));
  mistral.submit(tweet_request("x"));
  const auto sent = nlohmann::json::parse(server.requests().at(1));
  EXPECT_FALSE(sent.contains("n"));
  EXPECT_TRUE(sent.contains("response_format"));
}

TEST(HttpBackend, MissingCredentialNamesTheVariable) {
  HttpBackendConfig c;
  c.base_url = "http://127.0.0.1:9";
  c.api_key_env = "TEXTPOS_SURELY_UNSET_KEY";
  ::unsetenv("TEXTPOS_SURELY_UNSET_KEY");
  try {
    HttpBackend backend(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("TEXTPOS_SURELY_UNSET_KEY"), std::string::npos);
  }
}

TEST(HttpBackend, SecretNeverReachesTheCache) {
  FakeServer server;
  testing::TempDir dir;
  HttpBackend backend(config_for(server));
  auto store = CacheStore::open(dir / "cache.jsonl");
  submit_cached(backend, tweet_request("We need tax cuts"), store);
  const auto log = read_file(dir / "cache.jsonl");
  EXPECT_FALSE(log.empty());
  EXPECT_EQ(log.find(kSecret), std::string::npos);
  EXPECT_EQ(log.find(kKeyVar), std::string::npos);
}

TEST(DecodeChatResponse, Variants) {
  EXPECT_EQ(decode_chat_response(200, R"({"choices":[{"text":"{\"Score\": 5}"}]})").content,
            R"({"Score": 5})");
  EXPECT_EQ(decode_chat_response(200, "<html>").failure, FailureKind::kTransient);
  EXPECT_EQ(decode_chat_response(200, R"({"choices":[]})").failure, FailureKind::kPermanent);
  EXPECT_EQ(decode_chat_response(500, "oops").failure, FailureKind::kTransient);
  EXPECT_EQ(parse_api_style("mistral"), ApiStyle::kMistral);
  EXPECT_THROW(parse_api_style("carrier-pigeon"), ConfigError);
}

}  // namespace
}  // namespace textpos
