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

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "textpos/errors.hpp"
#include "textpos/prompting.hpp"

namespace textpos {

// Decoding contract: greedy, single completion, short response.
struct DecodingParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 20;
  bool json_mode = true;
  int n = 1;

  // Throws ConfigError unless max_tokens >= 1 and n >= 1.
  void validate() const;
};

struct BackendRequest {
  std::string model_id;
  RenderedMessage message;
  DecodingParams params;
};

// Content digest of a request: SHA-256 (hex) of the compact JSON array
//   ["textpos.request.v1", model_id, content, temperature, top_p, max_tokens, json_mode]
// where temperature and top_p are strings in shortest round-trip decimal form
// ("0", "1", "0.001"), max_tokens is an integer and json_mode a boolean.
// n and the message metadata are not part of the key.
std::string cache_key(const BackendRequest& request);

// SHA-256 of a message content; the key scripted mock backends are keyed on.
std::string content_digest(std::string_view content);

struct RawResponse {
  std::string request_digest;
  std::string body;
  // status, latency_ms, attempts, retries, params actually sent, usage.
  nlohmann::json transport_meta = nlohmann::json::object();
  std::string timestamp;  // UTC, ISO 8601
};

// How a single transport attempt ended.
enum class FailureKind { kNone, kTransient, kTimeout, kAuth, kPermanent };

struct BackendReply {
  FailureKind failure = FailureKind::kNone;
  int http_status = 0;
  std::string content;  // decoded completion text when failure == kNone
  std::string detail;   // diagnostic for failures
  nlohmann::json usage = nlohmann::json::object();
};

// Maps an HTTP status to a failure class: 2xx none, 401/403 auth,
// 408/425/429/5xx transient, everything else permanent.
FailureKind classify_http_status(int status);

class BackendError : public Error {
 public:
  BackendError(FailureKind kind, int attempts, const std::string& what)
      : Error(what), kind_(kind), attempts_(attempts) {}

  FailureKind kind() const { return kind_; }
  int attempts() const { return attempts_; }

 private:
  FailureKind kind_;
  int attempts_;
};

struct RetryPolicy {
  int max_attempts = 5;  // including the first
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  double multiplier = 2.0;

  // Delay before attempt `attempt + 1`, attempt being 1-based.
  std::chrono::milliseconds backoff(int attempt) const;
};

// Token bucket shared by all callers of one backend. A non-positive rate
// disables limiting.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double requests_per_minute, double burst = 1.0);

  // Blocks until a token is available.
  void acquire();

  double requests_per_minute() const { return rate_per_minute_; }

 private:
  double rate_per_minute_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
};

struct BackendOptions {
  RetryPolicy retry;
  double requests_per_minute = 60.0;
  // Sleep hook used between retries; tests replace it to avoid waiting.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// A chat-completion service. Implementations must be safe to call from several
// threads at once.
class Backend {
 public:
  explicit Backend(BackendOptions options);
  virtual ~Backend() = default;

  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  virtual std::string name() const = 0;
  virtual bool supports_json_mode() const = 0;

  // Submits with rate limiting and retries. Throws BackendError.
  RawResponse submit(const BackendRequest& request);

  const BackendOptions& options() const { return options_; }
  // Number of transport attempts made so far (network calls for remote backends).
  std::size_t call_count() const { return calls_.load(); }

 protected:
  // One transport attempt.
  virtual BackendReply send(const BackendRequest& request) = 0;

 private:
  BackendOptions options_;
  RateLimiter limiter_;
  std::atomic<std::size_t> calls_{0};
};

using BackendHandle = std::shared_ptr<Backend>;

inline RawResponse submit(Backend& backend, const BackendRequest& request) {
  return backend.submit(request);
}

std::string_view to_string(FailureKind kind);

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace textpos
