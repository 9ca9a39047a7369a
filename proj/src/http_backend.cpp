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

#include "textpos/http_backend.hpp"

#include <cstdlib>

namespace textpos {

ApiStyle parse_api_style(std::string_view s) {
  if (s == "openai") return ApiStyle::kOpenAi;
  if (s == "mistral") return ApiStyle::kMistral;
  if (s == "openai_legacy") return ApiStyle::kOpenAiLegacy;
  throw ConfigError("unknown api style '" + std::string(s) + "'");
}

std::string_view to_string(ApiStyle style) {
  switch (style) {
    case ApiStyle::kOpenAi:
      return "openai";
    case ApiStyle::kMistral:
      return "mistral";
    case ApiStyle::kOpenAiLegacy:
      return "openai_legacy";
  }
  return "openai";
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : Backend(config.options), config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("backend endpoint URL is empty");
  if (!config_.api_key_env.empty()) {
    const char* v = std::getenv(config_.api_key_env.c_str());
    if (v == nullptr || *v == '\0') {
      throw ConfigError("credential environment variable " + config_.api_key_env +
                        " is not set");
    }
    token_ = v;
  }
}

std::string HttpBackend::name() const { return std::string(to_string(config_.style)); }

nlohmann::json HttpBackend::payload(const BackendRequest& request) const {
  const auto& p = request.params;
  nlohmann::json body;
  body["model"] = request.model_id;
  body["messages"] = nlohmann::json::array(
      {{{"role", request.message.role}, {"content", request.message.content}}});
  body["max_tokens"] = p.max_tokens;
  body["temperature"] = p.temperature;
  body["top_p"] = p.top_p;
  if (config_.style != ApiStyle::kMistral) body["n"] = p.n;
  if (p.json_mode && supports_json_mode()) {
    body["response_format"] = {{"type", "json_object"}};
  }
  return body;
}

BackendReply decode_chat_response(int status, std::string_view body) {
  BackendReply reply;
  reply.http_status = status;
  reply.failure = classify_http_status(status);
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (reply.failure != FailureKind::kNone) {
    std::string detail(body.substr(0, 500));
    if (!doc.is_discarded() && doc.contains("error")) {
      const auto& err = doc["error"];
      detail = err.is_object() ? err.value("message", err.dump()) : err.dump();
    }
    reply.detail = detail;
    return reply;
  }
  if (doc.is_discarded() || !doc.is_object()) {
    reply.failure = FailureKind::kTransient;
    reply.detail = "response body is not JSON";
    return reply;
  }
  const auto& choices = doc.value("choices", nlohmann::json::array());
  if (!choices.is_array() || choices.empty()) {
    reply.failure = FailureKind::kPermanent;
    reply.detail = "response has no choices";
    return reply;
  }
  const auto& first = choices[0];
  if (first.contains("message") && first["message"].contains("content") &&
      first["message"]["content"].is_string()) {
    reply.content = first["message"]["content"].get<std::string>();
  } else if (first.contains("text") && first["text"].is_string()) {
    reply.content = first["text"].get<std::string>();
  } else {
    // Some servers return null content on refusals; treat as an empty answer.
    reply.content = "";
  }
  if (doc.contains("usage") && doc["usage"].is_object()) {
    for (const char* k : {"prompt_tokens", "completion_tokens", "total_tokens"}) {
      if (doc["usage"].contains(k)) reply.usage[k] = doc["usage"][k];
    }
  }
  return reply;
}

BackendReply HttpBackend::send(const BackendRequest& request) {
  httplib::Client client(config_.base_url);
  const auto timeout = config_.timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers = {{"Accept", "application/json"}};
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  const auto res =
      client.Post(config_.path, headers, payload(request).dump(), "application/json");
  if (!res) {
    BackendReply reply;
    const auto err = res.error();
    reply.failure = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                        ? FailureKind::kTimeout
                        : FailureKind::kTransient;
    reply.detail = httplib::to_string(err);
    return reply;
  }
  return decode_chat_response(res->status, res->body);
}

}  // namespace textpos
