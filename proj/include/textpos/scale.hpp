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

namespace textpos {

// Bounded response scale of a scoring task, e.g. 0 = "Extremely left",
// 100 = "Extremely right".
struct Scale {
  double min = 0.0;
  double max = 100.0;
  std::string min_label;
  std::string max_label;
  std::string dimension_name;

  bool contains(double v) const { return v >= min && v <= max; }

  // Throws ConfigError unless min < max.
  void validate() const;

  bool operator==(const Scale&) const = default;
};

}  // namespace textpos
