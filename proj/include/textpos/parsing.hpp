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

#include <string>
#include <string_view>

#include "textpos/scale.hpp"

namespace textpos {

// Result of reading a score out of a model response. NA is a model judgment
// ("no political content"); Malformed is a measurement failure. Both are kept
// out of means but counted separately.
class ParseOutcome {
 public:
  enum class Kind { kNumeric, kNa, kMalformed };

  static ParseOutcome numeric(double value) { return ParseOutcome(Kind::kNumeric, value, {}); }
  static ParseOutcome na() { return ParseOutcome(Kind::kNa, 0.0, {}); }
  static ParseOutcome malformed(std::string reason) {
    return ParseOutcome(Kind::kMalformed, 0.0, std::move(reason));
  }

  Kind kind() const { return kind_; }
  bool is_numeric() const { return kind_ == Kind::kNumeric; }
  bool is_na() const { return kind_ == Kind::kNa; }
  bool is_malformed() const { return kind_ == Kind::kMalformed; }
  // Only meaningful for numeric outcomes.
  double value() const { return value_; }
  const std::string& reason() const { return reason_; }

  bool operator==(const ParseOutcome&) const = default;

 private:
  ParseOutcome(Kind kind, double value, std::string reason)
      : kind_(kind), value_(value), reason_(std::move(reason)) {}

  Kind kind_;
  double value_;
  std::string reason_;
};

std::string_view to_string(ParseOutcome::Kind kind);

// Total over arbitrary bytes; never throws. Tries, in order:
//  1. the body (or its outermost {...} span) as a JSON object with a "Score"
//     key matched case-insensitively; a number or numeric string is a score,
//     "NA" / "N/A" / null is NA;
//  2. the first "Score" in the text followed by a number (truncated JSON); an
//     NA token in that position gives NA;
//  3. a body that is nothing but a number;
// otherwise Malformed. Scores outside the scale are Malformed, never clamped.
ParseOutcome parse_score(std::string_view body, const Scale& scale);

}  // namespace textpos
