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

#include "textpos/mock_backend.hpp"

#include <algorithm>
#include <cctype>

#include "textpos/numbers.hpp"

namespace textpos {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string score_body(double score) { return "{\"Score\": " + format_number(score) + "}"; }

std::string na_body() { return "{\"Score\": \"NA\"}"; }

BackendOptions mock_backend_options() {
  BackendOptions o;
  o.requests_per_minute = 0.0;
  o.retry.initial_backoff = std::chrono::milliseconds(0);
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

MockBackend::MockBackend(MockMode mode, std::map<std::string, std::string> table,
                         UnmappedPolicy unmapped, BackendOptions options)
    : Backend(std::move(options)), mode_(mode), table_(std::move(table)), unmapped_(unmapped) {
  if (mode_ == MockMode::kKeywordRule) {
    std::map<std::string, std::string> lowered;
    for (auto& [k, v] : table_) {
      if (!parse_number(v)) throw ConfigError("keyword rule '" + k + "' maps to non-number " + v);
      lowered.emplace(lower(k), v);
    }
    table_ = std::move(lowered);
  }
}

void MockBackend::inject(std::vector<BackendReply> replies) {
  std::lock_guard lock(mu_);
  for (auto& r : replies) injected_.push_back(std::move(r));
}

BackendReply MockBackend::send(const BackendRequest& request) {
  {
    std::lock_guard lock(mu_);
    if (!injected_.empty()) {
      BackendReply r = std::move(injected_.front());
      injected_.pop_front();
      return r;
    }
  }
  BackendReply reply;
  reply.http_status = 200;
  const RenderedMessage& m = request.message;

  if (mode_ == MockMode::kScripted) {
    auto it = table_.find(content_digest(m.content));
    if (it != table_.end()) {
      reply.content = it->second;
    } else if (unmapped_ == UnmappedPolicy::kNa) {
      reply.content = na_body();
    } else {
      reply.failure = FailureKind::kPermanent;
      reply.http_status = 404;
      reply.detail = "no scripted reply for content digest " + content_digest(m.content);
    }
    return reply;
  }

  const std::string haystack = lower(m.text.empty() ? m.content : m.text);
  std::size_t best_pos = std::string::npos;
  const std::string* best_key = nullptr;
  for (const auto& [key, score] : table_) {
    const auto pos = haystack.find(key);
    if (pos == std::string::npos) continue;
    if (pos < best_pos || (pos == best_pos && key.size() > best_key->size())) {
      best_pos = pos;
      best_key = &key;
    }
  }
  reply.content = best_key ? score_body(*parse_number(table_.at(*best_key))) : na_body();
  return reply;
}

BackendHandle make_mock_backend(MockMode mode, std::map<std::string, std::string> table,
                                UnmappedPolicy unmapped) {
  return std::make_shared<MockBackend>(mode, std::move(table), unmapped, mock_backend_options());
}

}  // namespace textpos
