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

#include <optional>
#include <string>
#include <string_view>

namespace textpos {

// Shortest decimal text that round-trips to the same double. Integral values
// print without a fraction ("70", not "70.0").
std::string format_number(double v);

// Parses the whole of s (surrounding ASCII whitespace allowed) as a finite
// decimal number. Returns nullopt on any trailing garbage.
std::optional<double> parse_number(std::string_view s);

std::string_view trim(std::string_view s);

// True for the missing-value markers used in delimited input: "" and "NA".
bool is_missing_marker(std::string_view s);

}  // namespace textpos
