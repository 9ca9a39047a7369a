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

#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "textpos/cache_store.hpp"
#include "textpos/delimited.hpp"
#include "textpos/digest.hpp"
#include "textpos/errors.hpp"
#include "textpos/mock_backend.hpp"
#include "textpos/prompting.hpp"

namespace textpos {
namespace {

BackendRequest request_for(std::string text, std::string model = "m") {
  BackendRequest r;
  r.model_id = std::move(model);
  r.message = render_prompt(get_preset("tweet_left_right"), text);
  return r;
}

TEST(CacheKey, StableAndSensitive) {
  const auto a = request_for("We need tax cuts");
  EXPECT_EQ(cache_key(a), cache_key(request_for("We need tax cuts")));
  EXPECT_EQ(cache_key(a).size(), 64u);

  auto b = a;
  b.params.max_tokens = 21;
  EXPECT_NE(cache_key(a), cache_key(b));
  EXPECT_NE(cache_key(a), cache_key(request_for("We need  tax cuts")));
  EXPECT_NE(cache_key(a), cache_key(request_for("We need tax cuts", "m2")));
  auto c = a;
  c.params.temperature = 0.001;
  EXPECT_NE(cache_key(a), cache_key(c));
  auto d = a;
  d.params.json_mode = false;
  EXPECT_NE(cache_key(a), cache_key(d));
  // Metadata outside the request contract does not matter.
  auto e = a;
  e.message.unit_ids = {"x"};
  e.params.n = 3;
  EXPECT_EQ(cache_key(a), cache_key(e));
}

TEST(CacheKey, DocumentedCanonicalForm) {
  BackendRequest r;
  r.model_id = "gpt";
  r.message.content = "A\nT\nB";
  const std::string canonical = R"(["textpos.request.v1","gpt","A\nT\nB","0","1",20,true])";
  EXPECT_EQ(cache_key(r), sha256_hex(canonical));
}

TEST(DecodingParams, Defaults) {
  DecodingParams p;
  EXPECT_EQ(p.temperature, 0.0);
  EXPECT_EQ(p.top_p, 1.0);
  EXPECT_EQ(p.max_tokens, 20);
  EXPECT_EQ(p.n, 1);
  p.max_tokens = 0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(HttpStatus, Classification) {
  EXPECT_EQ(classify_http_status(200), FailureKind::kNone);
  EXPECT_EQ(classify_http_status(401), FailureKind::kAuth);
  EXPECT_EQ(classify_http_status(403), FailureKind::kAuth);
  EXPECT_EQ(classify_http_status(429), FailureKind::kTransient);
  EXPECT_EQ(classify_http_status(503), FailureKind::kTransient);
  EXPECT_EQ(classify_http_status(404), FailureKind::kPermanent);
  EXPECT_EQ(classify_http_status(400), FailureKind::kPermanent);
}

TEST(RetryPolicy, ExponentialAndCapped) {
  RetryPolicy p;
  EXPECT_EQ(p.backoff(1).count(), 500);
  EXPECT_EQ(p.backoff(2).count(), 1000);
  EXPECT_EQ(p.backoff(3).count(), 2000);
  EXPECT_EQ(p.backoff(20).count(), 30000);
}

TEST(MockBackend, KeywordRule) {
  auto backend = make_mock_backend(MockMode::kKeywordRule, {{"tax cuts", "80"}, {"medicare", "20"}});
  EXPECT_EQ(submit(*backend, request_for("We need tax cuts")).body, R"({"Score": 80})");
  EXPECT_EQ(submit(*backend, request_for("Save MEDICARE")).body, R"({"Score": 20})");
  EXPECT_EQ(submit(*backend, request_for("Happy birthday")).body, R"({"Score": "NA"})");
  // The instructions mention neither keyword, only the tweet is matched.
  EXPECT_EQ(backend->call_count(), 3u);
}

TEST(MockBackend, EarliestKeywordWins) {
  auto backend = make_mock_backend(MockMode::kKeywordRule, {{"tax", "70"}, {"medicare", "20"}});
  EXPECT_EQ(submit(*backend, request_for("medicare, not tax")).body, R"({"Score": 20})");
}

TEST(MockBackend, Scripted) {
  const auto req = request_for("anything");
  auto backend = make_mock_backend(MockMode::kScripted,
                                   {{content_digest(req.message.content), R"({"Score": 70})"}});
  EXPECT_EQ(submit(*backend, req).body, R"({"Score": 70})");
  EXPECT_EQ(submit(*backend, request_for("other")).body, R"({"Score": "NA"})");

  auto strict = make_mock_backend(MockMode::kScripted, {}, UnmappedPolicy::kError);
  EXPECT_THROW(submit(*strict, req), BackendError);
}

std::shared_ptr<MockBackend> retrying_mock(int max_attempts, std::vector<std::chrono::milliseconds>* slept) {
  BackendOptions o = mock_backend_options();
  o.retry.max_attempts = max_attempts;
  o.retry.initial_backoff = std::chrono::milliseconds(500);
  o.sleep = [slept](std::chrono::milliseconds d) { slept->push_back(d); };
  return std::make_shared<MockBackend>(MockMode::kKeywordRule,
                                       std::map<std::string, std::string>{{"tax", "60"}},
                                       UnmappedPolicy::kNa, o);
}

TEST(Submit, TransientThenSuccessRetriesOnce) {
  std::vector<std::chrono::milliseconds> slept;
  auto backend = retrying_mock(5, &slept);
  BackendReply busy;
  busy.failure = FailureKind::kTransient;
  busy.http_status = 429;
  backend->inject({busy});
  const auto r = submit(*backend, request_for("tax"));
  EXPECT_EQ(r.body, R"({"Score": 60})");
  EXPECT_EQ(r.transport_meta.at("retries"), 1);
  EXPECT_EQ(r.transport_meta.at("attempts"), 2);
  EXPECT_EQ(slept, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500)}));
  EXPECT_EQ(r.request_digest, cache_key(request_for("tax")));
}

TEST(Submit, AuthFailureIsNotRetried) {
  std::vector<std::chrono::milliseconds> slept;
  auto backend = retrying_mock(5, &slept);
  BackendReply denied;
  denied.failure = FailureKind::kAuth;
  denied.http_status = 401;
  backend->inject({denied});
  try {
    submit(*backend, request_for("tax"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), FailureKind::kAuth);
    EXPECT_EQ(e.attempts(), 1);
  }
  EXPECT_TRUE(slept.empty());
  EXPECT_EQ(backend->call_count(), 1u);
}

TEST(Submit, BudgetExhausted) {
  std::vector<std::chrono::milliseconds> slept;
  auto backend = retrying_mock(3, &slept);
  BackendReply timeout;
  timeout.failure = FailureKind::kTimeout;
  backend->inject({timeout, timeout, timeout, timeout});
  try {
    submit(*backend, request_for("tax"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), FailureKind::kTimeout);
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(slept.size(), 2u);
}

TEST(RateLimiter, SpacesRequests) {
  RateLimiter limiter(6000.0, 1.0);  // one token per 10 ms
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 6; ++i) limiter.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(45));
}

TEST(CacheStore, MissThenHit) {
  testing::TempDir dir;
  auto store = CacheStore::open(dir / "cache.jsonl");
  auto backend = make_mock_backend(MockMode::kKeywordRule, {{"tax", "80"}});
  const auto req = request_for("tax");
  const auto first = submit_cached(*backend, req, store);
  const auto second = submit_cached(*backend, req, store);
  EXPECT_FALSE(first.cache_hit);
  EXPECT_TRUE(second.cache_hit);
  EXPECT_EQ(first.response.body, second.response.body);
  EXPECT_EQ(backend->call_count(), 1u);
}

TEST(CacheStore, ColdThenWarmReplay) {
  testing::TempDir dir;
  auto backend = make_mock_backend(MockMode::kKeywordRule, {{"tax", "80"}});
  std::vector<std::string> bodies;
  {
    auto store = CacheStore::open(dir / "cache.jsonl");
    for (int i = 0; i < 5; ++i) bodies.push_back(submit_cached(*backend, request_for("tax " + std::to_string(i)), store).response.body);
    EXPECT_EQ(store.size(), 5u);
  }
  EXPECT_EQ(backend->call_count(), 5u);
  const auto log = read_file(dir / "cache.jsonl");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 5);

  auto warm = make_mock_backend(MockMode::kKeywordRule, {});
  auto store = CacheStore::open(dir / "cache.jsonl");
  for (int i = 0; i < 5; ++i) {
    const auto r = submit_cached(*warm, request_for("tax " + std::to_string(i)), store);
    EXPECT_TRUE(r.cache_hit);
    EXPECT_EQ(r.response.body, bodies[static_cast<std::size_t>(i)]);
  }
  EXPECT_EQ(warm->call_count(), 0u);
}

TEST(CacheStore, RecordFieldsWithoutMessageText) {
  testing::TempDir dir;
  auto store = CacheStore::open(dir / "cache.jsonl");
  auto backend = make_mock_backend(MockMode::kKeywordRule, {{"tax", "80"}});
  submit_cached(*backend, request_for("secret-looking tax text"), store);
  const auto line = read_file(dir / "cache.jsonl");
  const auto j = nlohmann::json::parse(line);
  for (const char* key : {"digest", "model_id", "params", "content_hash", "body", "timestamp", "transport_meta"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(line.find("secret-looking"), std::string::npos);
}

TEST(CacheStore, TruncatedTailIgnoredFirstRecordWins) {
  testing::TempDir dir;
  const auto path = dir / "cache.jsonl";
  auto backend = make_mock_backend(MockMode::kKeywordRule, {{"tax", "80"}});
  const auto req = request_for("tax");
  {
    auto store = CacheStore::open(path);
    submit_cached(*backend, req, store);
  }
  const auto line = read_file(path);
  auto second = nlohmann::json::parse(line);
  second["body"] = R"({"Score": 1})";
  write_file(path, line + second.dump() + "\n" + line.substr(0, line.size() / 2));
  auto store = CacheStore::open(path);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(store.find(cache_key(req))->body, R"({"Score": 80})");
  EXPECT_FALSE(store.put(req, *store.find(cache_key(req))));
}

TEST(CacheStore, CorruptMiddleLineRaises) {
  testing::TempDir dir;
  write_file(dir / "cache.jsonl", "not json\n{}\n");
  EXPECT_THROW(CacheStore::open(dir / "cache.jsonl"), DataError);
}

TEST(CacheStore, UnwritableLogRaises) {
  EXPECT_THROW(CacheStore::open("/proc/textpos-no-such-dir/cache.jsonl"), IoError);
}

}  // namespace
}  // namespace textpos
