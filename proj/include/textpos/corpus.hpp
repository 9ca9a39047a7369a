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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textpos {

enum class UnitKind { kTweet, kSentence, kDocument };

std::string_view to_string(UnitKind kind);
// Accepts "tweet", "sentence", "document". Throws DataError otherwise.
UnitKind parse_unit_kind(std::string_view s);

// One scorable text.
struct TextUnit {
  std::string unit_id;
  std::string target_id;  // document or actor the unit belongs to
  std::optional<std::string> group_id;
  std::optional<std::string> language;
  std::string text;
  UnitKind kind = UnitKind::kSentence;

  bool operator==(const TextUnit&) const = default;
};

struct TargetMeta {
  std::string display_name;
  std::optional<std::string> group_id;
  // External benchmark values keyed by benchmark name (e.g. "nokken_poole").
  std::map<std::string, double> benchmarks;

  bool operator==(const TargetMeta&) const = default;
};

struct Corpus {
  std::vector<TextUnit> units;
  std::map<std::string, TargetMeta> targets;

  // Throws DataError on duplicate unit ids, blank texts or unit target ids
  // without a TargetMeta entry.
  void validate() const;

  // Units of one target in corpus order.
  std::vector<const TextUnit*> units_of(std::string_view target_id) const;

  bool operator==(const Corpus&) const = default;
};

// A row that failed to load, for the sidecar report.
struct Rejection {
  std::size_t line = 0;
  std::string id;
  std::string reason;
};

enum class InputFormat { kDelimited, kJsonLines };

// Maps corpus fields to input columns. Empty optional names mean "absent".
struct ColumnSchema {
  std::string unit_id = "unit_id";
  std::string target_id = "target_id";
  std::string text = "text";
  std::string group_id;
  std::string language;
  std::string kind;
  std::string display_name;
  // Group of the target; when unset the target takes its units' group.
  std::string target_group;
  // benchmark name -> column
  std::map<std::string, std::string> benchmarks;
  // Every column starting with this prefix becomes a benchmark named by the
  // remainder. Empty disables.
  std::string benchmark_prefix;
  // Kind for rows without a kind column (or with a missing kind cell).
  UnitKind default_kind = UnitKind::kSentence;

  // Schema matching the files written by save_corpus.
  static ColumnSchema normalized();
};

struct LoadOptions {
  InputFormat format = InputFormat::kDelimited;
  char delimiter = ',';
  ColumnSchema schema;
};

struct CorpusLoad {
  Corpus corpus;
  std::vector<Rejection> rejected;
};

// Reads a corpus. Rows with blank text or a duplicate unit id are rejected and
// reported; a missing mapped column, an unreadable file or conflicting target
// metadata raise. Row order is preserved.
CorpusLoad load_corpus(const std::filesystem::path& path, const LoadOptions& options);

// Same as load_corpus over in-memory content.
CorpusLoad parse_corpus(std::string_view content, const LoadOptions& options);

// JSON-lines in the normalized schema: one object per unit, carrying its
// target's display name and benchmarks (prefixed "benchmark:").
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Per-target metadata table (display names, groups, benchmark columns).
struct TargetSchema {
  std::string target_id = "target_id";
  std::string display_name;
  std::string group_id;
  std::map<std::string, std::string> benchmarks;
};

// Merges a target table into corpus.targets. Rows naming targets absent from
// the corpus are ignored and reported; values present in the table override
// what the corpus rows carried.
std::vector<Rejection> merge_targets(Corpus& corpus, const std::filesystem::path& path,
                                     char delimiter, const TargetSchema& schema);

void write_rejections(const std::filesystem::path& path, const std::vector<Rejection>& rejected);

// --- segmentation ---

enum class SegmentationMode { kDatasetProvided, kRuleBased };

SegmentationMode parse_segmentation_mode(std::string_view s);

// Rule-based mode splits a document after ".", "!", "?" or an ellipsis that is
// followed by whitespace and an upper-case (or non-ASCII) letter, or by the
// end of the text. Common abbreviations and single-letter initials do not end
// a sentence. Sentence ids are "<unit_id>:<n>" with n zero-padded to 4 digits.
// Dataset-provided mode returns the unit unchanged.
std::vector<TextUnit> segment_sentences(const TextUnit& document, SegmentationMode mode);

// Segments every document-kind unit; other units pass through unchanged.
Corpus segment_corpus(const Corpus& corpus, SegmentationMode mode);

// --- sampling ---

struct ExcludedActor {
  std::string target_id;
  std::size_t available = 0;
};

struct ActorSample {
  Corpus corpus;
  std::vector<ExcludedActor> excluded;
};

// Draws per_actor units without replacement from every actor that has at
// least max(per_actor, min_required) units. Unit ids are sorted before the
// draw and each actor uses its own stream derived from (seed, target_id), so
// the sample does not depend on row order or on which other actors exist.
// Output units are ordered by target id, then unit id.
ActorSample sample_actor_texts(const Corpus& corpus, std::size_t per_actor, std::uint64_t seed,
                               std::size_t min_required);

}  // namespace textpos
