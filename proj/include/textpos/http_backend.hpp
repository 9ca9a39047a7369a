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

#include <chrono>
#include <string>
#include <string_view>

#include "textpos/backend.hpp"

namespace textpos {

// Request/response dialects of chat-completion services.
//  - openai: OpenAI-compatible (also vLLM, llama.cpp server, LM Studio);
//    sends "n" and "response_format" when JSON mode is requested.
//  - mistral: same payload without "n".
//  - openai_legacy: OpenAI shape for models without JSON mode; never sends
//    "response_format".
enum class ApiStyle { kOpenAi, kMistral, kOpenAiLegacy };

ApiStyle parse_api_style(std::string_view s);
std::string_view to_string(ApiStyle style);

struct HttpBackendConfig {
  ApiStyle style = ApiStyle::kOpenAi;
  // Base URL, e.g. "https://api.openai.com" or "http://127.0.0.1:8080".
  std::string base_url;
  std::string path = "/v1/chat/completions";
  // Name of the environment variable holding the bearer token. Empty for
  // servers without authentication.
  std::string api_key_env;
  std::chrono::seconds timeout{60};
  BackendOptions options;
};

// Generic chat-completion client over HTTP(S).
class HttpBackend : public Backend {
 public:
  // Reads the credential from the environment; throws ConfigError naming the
  // variable if it is unset or empty.
  explicit HttpBackend(HttpBackendConfig config);

  std::string name() const override;
  bool supports_json_mode() const override { return config_.style != ApiStyle::kOpenAiLegacy; }

  // The JSON payload sent for a request (exposed for tests and dry runs).
  nlohmann::json payload(const BackendRequest& request) const;

 protected:
  BackendReply send(const BackendRequest& request) override;

 private:
  HttpBackendConfig config_;
  std::string token_;
};

// Extracts choices[0].message.content (or choices[0].text) and usage from a
// chat-completion response body.
BackendReply decode_chat_response(int status, std::string_view body);

}  // namespace textpos
