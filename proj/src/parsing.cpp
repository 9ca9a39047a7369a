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

#include "textpos/parsing.hpp"

#include <cctype>
#include <cmath>
#include <optional>

#include "json.hpp"
#include "textpos/numbers.hpp"

namespace textpos {
namespace {

using nlohmann::json;

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

bool is_na_token(std::string_view s) {
  s = trim(s);
  return iequals(s, "NA") || iequals(s, "N/A") || iequals(s, "null");
}

ParseOutcome check_range(double v, const Scale& scale) {
  if (!std::isfinite(v)) return ParseOutcome::malformed("non-finite score");
  if (!scale.contains(v)) return ParseOutcome::malformed("out of range");
  return ParseOutcome::numeric(v);
}

// Layer 1 on an already parsed JSON value. nullopt means "no verdict".
std::optional<ParseOutcome> from_json(const json& doc, const Scale& scale) {
  if (doc.is_number()) return check_range(doc.get<double>(), scale);
  if (!doc.is_object()) return std::nullopt;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!iequals(trim(it.key()), "score")) continue;
    const json& v = it.value();
    if (v.is_null()) return ParseOutcome::na();
    if (v.is_number()) return check_range(v.get<double>(), scale);
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      if (is_na_token(s)) return ParseOutcome::na();
      if (auto num = parse_number(s)) return check_range(*num, scale);
      return ParseOutcome::malformed("non-numeric Score value");
    }
    return ParseOutcome::malformed("unsupported Score value type");
  }
  return ParseOutcome::malformed("JSON object without Score key");
}

std::optional<ParseOutcome> parse_json_layer(std::string_view body, const Scale& scale) {
  json doc = json::parse(body, nullptr, false);
  if (!doc.is_discarded()) return from_json(doc, scale);
  // Prose or code fences around an object.
  const auto open = body.find('{');
  const auto close = body.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  doc = json::parse(body.substr(open, close - open + 1), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  return from_json(doc, scale);
}

// Longest numeric prefix of s: optional sign, digits, optional fraction.
std::string_view number_prefix(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  const std::size_t digits_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  bool any = i > digits_start;
  if (i < s.size() && s[i] == '.') {
    std::size_t j = i + 1;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i + 1) {
      any = true;
      i = j;
    } else if (any) {
      ++i;  // "42." is still 42
    }
  }
  return any ? s.substr(0, i) : std::string_view{};
}

std::optional<ParseOutcome> scan_layer(std::string_view body, const Scale& scale) {
  for (std::size_t pos = 0; pos + 5 <= body.size(); ++pos) {
    if (!iequals(body.substr(pos, 5), "score")) continue;
    std::string_view rest = body.substr(pos + 5);
    // Separator: closing quote, colon or equals sign, opening quote, spaces.
    std::size_t i = 0;
    while (i < rest.size() &&
           (rest[i] == '"' || rest[i] == '\'' || rest[i] == ':' || rest[i] == '=' ||
            std::isspace(static_cast<unsigned char>(rest[i])))) {
      ++i;
    }
    if (i == 0) continue;  // "scores", "scored": not the key
    rest.remove_prefix(i);
    if (auto num = number_prefix(rest); !num.empty()) {
      if (auto v = parse_number(num)) return check_range(*v, scale);
    }
    for (std::string_view token : {"N/A", "NA", "null"}) {
      if (rest.size() >= token.size() && iequals(rest.substr(0, token.size()), token)) {
        const bool bounded = rest.size() == token.size() ||
                             !std::isalnum(static_cast<unsigned char>(rest[token.size()]));
        if (bounded) return ParseOutcome::na();
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ParseOutcome::Kind kind) {
  switch (kind) {
    case ParseOutcome::Kind::kNumeric:
      return "numeric";
    case ParseOutcome::Kind::kNa:
      return "na";
    case ParseOutcome::Kind::kMalformed:
      return "malformed";
  }
  return "malformed";
}

ParseOutcome parse_score(std::string_view body, const Scale& scale) {
  try {
    if (auto r = parse_json_layer(body, scale)) {
      // A JSON object without a usable key may still carry a score in prose.
      if (!r->is_malformed() || r->reason() != "JSON object without Score key") return *r;
    }
    if (auto r = scan_layer(body, scale)) return *r;
    if (auto v = parse_number(body)) return check_range(*v, scale);
    return ParseOutcome::malformed("no score found");
  } catch (...) {
    // nlohmann::json may still throw on pathological input (e.g. type errors).
    return ParseOutcome::malformed("unparseable response");
  }
}

}  // namespace textpos
