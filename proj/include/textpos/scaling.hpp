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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textpos/backend.hpp"
#include "textpos/cache_store.hpp"
#include "textpos/corpus.hpp"
#include "textpos/parsing.hpp"
#include "textpos/prompting.hpp"

namespace textpos {

// One backend answer for one unit under one (model, preset) pair.
struct ScoreRecord {
  std::string unit_id;
  std::string target_id;
  std::string model_id;
  std::string preset_id;
  ParseOutcome outcome = ParseOutcome::malformed("unset");
  std::string raw_digest;

  bool operator==(const ScoreRecord&) const = default;
};

// Mean of the numeric scores of one target. estimate is empty when no unit
// received a numeric score.
struct PositionEstimate {
  std::string target_id;
  std::string model_id;
  std::string preset_id;
  std::optional<double> estimate;
  std::size_t n_numeric = 0;
  std::size_t n_na = 0;
  std::size_t n_malformed = 0;

  std::size_t n_total() const { return n_numeric + n_na + n_malformed; }
  double coverage() const {
    return n_total() == 0 ? 0.0 : static_cast<double>(n_numeric) / static_cast<double>(n_total());
  }

  bool operator==(const PositionEstimate&) const = default;
};

struct ScaleProgress {
  std::size_t done = 0;
  std::size_t total = 0;
  std::size_t cache_hits = 0;
};

struct ScaleOptions {
  std::string model_id;
  DecodingParams params;
  std::size_t parallelism = 1;
  std::function<void(const ScaleProgress&)> on_progress;
};

struct ScaleStats {
  std::size_t requests = 0;
  std::size_t cache_hits = 0;
  std::size_t numeric = 0;
  std::size_t na = 0;
  std::size_t malformed = 0;
};

// Scores every unit with render_prompt + submit_cached + parse_score, using up
// to `parallelism` concurrent requests. Output is sorted by unit id whatever
// the completion order. On a hard backend failure no new requests start, the
// error is rethrown, and every response already received stays in the cache.
std::vector<ScoreRecord> scale_units(const Corpus& corpus, const PromptPreset& preset,
                                     Backend& backend, CacheStore& store,
                                     const ScaleOptions& options, ScaleStats* stats = nullptr);

// Per-target mean over numeric outcomes, sorted by target id. All records
// must come from one (model, preset) run with unique unit ids; DataError
// otherwise.
std::vector<PositionEstimate> aggregate_positions(std::span<const ScoreRecord> records);

struct UnitPosition {
  std::string unit_id;
  std::string target_id;
  std::optional<double> position;
};

struct TypicalityResult {
  std::vector<UnitPosition> units;        // sorted by unit id
  std::vector<PositionEstimate> targets;  // sorted by target id
};

inline constexpr std::string_view kTypicalityPresetId = "typicality_difference";

// Position of a unit = typicality in the Republican party minus typicality in
// the Democratic party, in [-100, 100]. A unit counts toward its target's
// mean only when both typicalities are numeric; otherwise it is counted as
// malformed (if either side is malformed) or NA. Throws DataError listing the
// unit ids present in only one run.
TypicalityResult typicality_difference(std::span<const ScoreRecord> republican,
                                       std::span<const ScoreRecord> democratic);

enum class SinglePromptLayout { kWholeDocument, kConcatenated };

class ContextBudgetError : public Error {
 public:
  using Error::Error;
};

struct SinglePromptOptions {
  ScaleOptions scale;
  // kConcatenated renders a target's units as a <TWEET> block list;
  // kWholeDocument joins them with single spaces into one text.
  SinglePromptLayout layout = SinglePromptLayout::kWholeDocument;
  std::string separator = std::string(kTweetSeparator);
  // Rough prompt size limit: ceil(bytes / chars_per_token) + max_tokens.
  std::size_t context_budget_tokens = 128000;
  double chars_per_token = 4.0;
};

struct SinglePromptResult {
  std::vector<ScoreRecord> records;  // one per target, unit_id = target_id
  std::vector<PositionEstimate> estimates;
};

std::size_t estimate_tokens(std::string_view content, double chars_per_token);

// One request per target. Every prompt is checked against the context budget
// before anything is submitted; ContextBudgetError lists the offenders.
SinglePromptResult scale_single_prompt(const Corpus& corpus, const PromptPreset& preset,
                                       Backend& backend, CacheStore& store,
                                       const SinglePromptOptions& options);

// --- serialization ---
//
// Records, delimited columns:
//   unit_id,target_id,model_id,preset_id,outcome,score,reason,raw_digest
// Estimates, delimited columns:
//   target_id,model_id,preset_id,estimate,n_numeric,n_na,n_malformed,coverage
// Absent scores and estimates are written as NA. JSON-lines files carry the
// same fields, with null for absent values.

std::string records_to_jsonl(std::span<const ScoreRecord> records);
std::string records_to_csv(std::span<const ScoreRecord> records);
std::vector<ScoreRecord> records_from_jsonl(std::string_view content);

std::string estimates_to_jsonl(std::span<const PositionEstimate> estimates);
std::string estimates_to_csv(std::span<const PositionEstimate> estimates);
std::vector<PositionEstimate> estimates_from_csv(std::string_view content);

std::string unit_positions_to_csv(std::span<const UnitPosition> units);

}  // namespace textpos
