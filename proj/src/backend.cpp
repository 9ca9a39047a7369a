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

#include "textpos/backend.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <thread>

#include "textpos/digest.hpp"
#include "textpos/numbers.hpp"

namespace textpos {

void DecodingParams::validate() const {
  if (max_tokens < 1) throw ConfigError("max_tokens must be at least 1");
  if (n < 1) throw ConfigError("n must be at least 1");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
}

std::string cache_key(const BackendRequest& request) {
  nlohmann::json key = nlohmann::json::array({
      "textpos.request.v1",
      request.model_id,
      request.message.content,
      format_number(request.params.temperature),
      format_number(request.params.top_p),
      request.params.max_tokens,
      request.params.json_mode,
  });
  return sha256_hex(key.dump());
}

std::string content_digest(std::string_view content) { return sha256_hex(content); }

FailureKind classify_http_status(int status) {
  if (status >= 200 && status < 300) return FailureKind::kNone;
  if (status == 401 || status == 403) return FailureKind::kAuth;
  if (status == 408 || status == 425 || status == 429 || status >= 500) {
    return FailureKind::kTransient;
  }
  return FailureKind::kPermanent;
}

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::kNone:
      return "none";
    case FailureKind::kTransient:
      return "transient";
    case FailureKind::kTimeout:
      return "timeout";
    case FailureKind::kAuth:
      return "auth";
    case FailureKind::kPermanent:
      return "permanent";
  }
  return "permanent";
}

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  const double scaled = static_cast<double>(initial_backoff.count()) *
                        std::pow(multiplier, std::max(0, attempt - 1));
  const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_minute_(requests_per_minute),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(Clock::now()) {}

void RateLimiter::acquire() {
  if (rate_per_minute_ <= 0.0) return;
  const double per_second = rate_per_minute_ / 60.0;
  while (true) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(mu_);
      const auto now = Clock::now();
      const std::chrono::duration<double> elapsed = now - last_;
      last_ = now;
      tokens_ = std::min(burst_, tokens_ + elapsed.count() * per_second);
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / per_second);
    }
    std::this_thread::sleep_for(wait);
  }
}

Backend::Backend(BackendOptions options)
    : options_(std::move(options)), limiter_(options_.requests_per_minute) {
  if (options_.retry.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

RawResponse Backend::submit(const BackendRequest& request) {
  request.params.validate();
  BackendRequest effective = request;
  if (!supports_json_mode()) effective.params.json_mode = false;

  const int max_attempts = options_.retry.max_attempts;
  for (int attempt = 1;; ++attempt) {
    limiter_.acquire();
    const auto start = std::chrono::steady_clock::now();
    ++calls_;
    BackendReply reply = send(effective);
    const auto latency = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - start);

    if (reply.failure == FailureKind::kNone) {
      RawResponse r;
      r.request_digest = cache_key(request);
      r.body = std::move(reply.content);
      r.timestamp = utc_timestamp();
      auto& meta = r.transport_meta;
      meta["backend"] = name();
      meta["status"] = reply.http_status;
      meta["latency_ms"] = std::round(latency.count() * 1000.0) / 1000.0;
      meta["attempts"] = attempt;
      meta["retries"] = attempt - 1;
      meta["params"] = {{"temperature", effective.params.temperature},
                        {"top_p", effective.params.top_p},
                        {"max_tokens", effective.params.max_tokens},
                        {"json_mode", effective.params.json_mode},
                        {"n", effective.params.n}};
      if (!reply.usage.empty()) meta["usage"] = std::move(reply.usage);
      return r;
    }

    const std::string where = name() + " (" + request.model_id + ")";
    if (reply.failure == FailureKind::kAuth || reply.failure == FailureKind::kPermanent) {
      throw BackendError(reply.failure, attempt,
                         where + ": " + std::string(to_string(reply.failure)) + " failure, HTTP " +
                             std::to_string(reply.http_status) + ": " + reply.detail);
    }
    if (attempt >= max_attempts) {
      throw BackendError(reply.failure, attempt,
                         where + ": retry budget exhausted after " + std::to_string(attempt) +
                             " attempts; last failure (" + std::string(to_string(reply.failure)) +
                             "): " + reply.detail);
    }
    options_.sleep(options_.retry.backoff(attempt));
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace textpos
