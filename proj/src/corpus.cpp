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

#include "textpos/corpus.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "textpos/delimited.hpp"
#include "textpos/errors.hpp"
#include "textpos/numbers.hpp"
#include "textpos/random.hpp"

namespace textpos {
namespace {

using nlohmann::json;

// One input row, independent of file format. Absent keys are missing.
struct RawRow {
  std::size_t line = 0;
  std::map<std::string, std::string, std::less<>> fields;
};

struct RawRows {
  std::set<std::string, std::less<>> columns;
  std::vector<RawRow> rows;
};

std::string json_scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

RawRows read_rows(std::string_view content, const LoadOptions& options) {
  RawRows out;
  if (options.format == InputFormat::kDelimited) {
    auto table = parse_delimited(content, options.delimiter);
    out.columns.insert(table.header.begin(), table.header.end());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      RawRow row;
      row.line = table.row_lines[r];
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        row.fields.emplace(table.header[c], table.rows[r][c]);
      }
      out.rows.push_back(std::move(row));
    }
    return out;
  }
  std::size_t line_no = 0;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw DataError("line " + std::to_string(line_no) + ": not a JSON object");
    }
    RawRow row;
    row.line = line_no;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      out.columns.insert(it.key());
      if (it.value().is_null()) continue;
      row.fields.emplace(it.key(), json_scalar_text(it.value()));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::optional<std::string> field(const RawRow& row, const std::string& column) {
  if (column.empty()) return std::nullopt;
  auto it = row.fields.find(column);
  if (it == row.fields.end() || is_missing_marker(it->second)) return std::nullopt;
  return it->second;
}

void require_columns(const RawRows& rows, const std::vector<std::string>& wanted) {
  std::vector<std::string> missing;
  for (const auto& c : wanted) {
    if (!c.empty() && !rows.columns.contains(c)) missing.push_back(c);
  }
  if (missing.empty()) return;
  std::string msg = "missing mapped column(s):";
  for (const auto& m : missing) msg += " " + m;
  throw DataError(msg);
}

// Merges one value into an optional slot; false on conflict.
template <class T>
bool merge_value(std::optional<T>& slot, const T& value) {
  if (!slot) {
    slot = value;
    return true;
  }
  return *slot == value;
}

}  // namespace

std::string_view to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::kTweet:
      return "tweet";
    case UnitKind::kSentence:
      return "sentence";
    case UnitKind::kDocument:
      return "document";
  }
  return "sentence";
}

UnitKind parse_unit_kind(std::string_view s) {
  if (s == "tweet") return UnitKind::kTweet;
  if (s == "sentence") return UnitKind::kSentence;
  if (s == "document") return UnitKind::kDocument;
  throw DataError("unknown unit kind '" + std::string(s) + "'");
}

void Corpus::validate() const {
  std::set<std::string_view> seen;
  for (const auto& u : units) {
    if (!seen.insert(u.unit_id).second) throw DataError("duplicate unit id " + u.unit_id);
    if (trim(u.text).empty()) throw DataError("unit " + u.unit_id + " has empty text");
    if (!targets.contains(u.target_id)) {
      throw DataError("unit " + u.unit_id + " refers to unknown target " + u.target_id);
    }
  }
}

std::vector<const TextUnit*> Corpus::units_of(std::string_view target_id) const {
  std::vector<const TextUnit*> out;
  for (const auto& u : units) {
    if (u.target_id == target_id) out.push_back(&u);
  }
  return out;
}

ColumnSchema ColumnSchema::normalized() {
  ColumnSchema s;
  s.group_id = "group_id";
  s.language = "language";
  s.kind = "kind";
  s.display_name = "target_name";
  s.target_group = "target_group";
  s.benchmark_prefix = "benchmark:";
  return s;
}

CorpusLoad parse_corpus(std::string_view content, const LoadOptions& options) {
  const ColumnSchema& schema = options.schema;
  RawRows raw = read_rows(content, options);

  std::vector<std::string> wanted = {schema.unit_id, schema.target_id, schema.text,
                                     schema.group_id, schema.language, schema.kind,
                                     schema.display_name, schema.target_group};
  for (const auto& [name, column] : schema.benchmarks) wanted.push_back(column);
  require_columns(raw, wanted);

  // Benchmark columns: explicit mapping plus prefix matches.
  std::map<std::string, std::string> benchmark_columns = schema.benchmarks;
  if (!schema.benchmark_prefix.empty()) {
    for (const auto& c : raw.columns) {
      if (c.size() > schema.benchmark_prefix.size() && c.starts_with(schema.benchmark_prefix)) {
        benchmark_columns.emplace(c.substr(schema.benchmark_prefix.size()), c);
      }
    }
  }

  CorpusLoad out;
  std::set<std::string, std::less<>> seen_ids;
  struct PendingTarget {
    std::optional<std::string> name;
    std::optional<std::string> group;
    std::map<std::string, double> benchmarks;
  };
  std::map<std::string, PendingTarget> pending;

  for (const auto& row : raw.rows) {
    auto reject = [&](std::string id, std::string reason) {
      out.rejected.push_back({row.line, std::move(id), std::move(reason)});
    };
    auto id = field(row, schema.unit_id);
    if (!id) {
      reject("", "missing unit id");
      continue;
    }
    auto target = field(row, schema.target_id);
    if (!target) {
      reject(*id, "missing target id");
      continue;
    }
    auto text = field(row, schema.text);
    if (!text || trim(*text).empty()) {
      reject(*id, "empty text");
      continue;
    }
    if (seen_ids.contains(*id)) {
      reject(*id, "duplicate unit id");
      continue;
    }

    TextUnit unit;
    unit.unit_id = *id;
    unit.target_id = *target;
    unit.group_id = field(row, schema.group_id);
    unit.language = field(row, schema.language);
    unit.text = *text;
    unit.kind = schema.default_kind;
    if (auto k = field(row, schema.kind)) {
      try {
        unit.kind = parse_unit_kind(trim(*k));
      } catch (const DataError& e) {
        reject(*id, e.what());
        continue;
      }
    }

    // Target metadata is validated before the row is accepted so a rejected
    // row leaves no trace.
    PendingTarget candidate = pending[unit.target_id];
    std::string conflict;
    if (auto name = field(row, schema.display_name); name && !merge_value(candidate.name, *name)) {
      conflict = "conflicting display name for target " + unit.target_id;
    }
    const auto target_group =
        schema.target_group.empty() ? unit.group_id : field(row, schema.target_group);
    if (target_group && !merge_value(candidate.group, *target_group)) {
      conflict = "conflicting group for target " + unit.target_id;
    }
    for (const auto& [bench, column] : benchmark_columns) {
      auto cell = field(row, column);
      if (!cell) continue;
      auto v = parse_number(*cell);
      if (!v) {
        conflict = "non-numeric benchmark " + bench + " '" + *cell + "'";
        break;
      }
      auto [it, inserted] = candidate.benchmarks.emplace(bench, *v);
      if (!inserted && it->second != *v) {
        conflict = "conflicting benchmark " + bench + " for target " + unit.target_id;
        break;
      }
    }
    if (!conflict.empty()) {
      reject(*id, conflict);
      continue;
    }
    pending[unit.target_id] = std::move(candidate);
    seen_ids.insert(unit.unit_id);
    out.corpus.units.push_back(std::move(unit));
  }

  for (const auto& u : out.corpus.units) {
    if (out.corpus.targets.contains(u.target_id)) continue;
    const auto& p = pending.at(u.target_id);
    TargetMeta meta;
    meta.display_name = p.name.value_or(u.target_id);
    meta.group_id = p.group;
    meta.benchmarks = p.benchmarks;
    out.corpus.targets.emplace(u.target_id, std::move(meta));
  }
  return out;
}

CorpusLoad load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  const std::string content = read_file(path);
  try {
    return parse_corpus(content, options);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& u : corpus.units) {
    nlohmann::ordered_json obj;
    obj["unit_id"] = u.unit_id;
    obj["target_id"] = u.target_id;
    obj["group_id"] = u.group_id ? json(*u.group_id) : json(nullptr);
    obj["language"] = u.language ? json(*u.language) : json(nullptr);
    obj["kind"] = std::string(to_string(u.kind));
    const auto& meta = corpus.targets.at(u.target_id);
    obj["target_name"] = meta.display_name;
    obj["target_group"] = meta.group_id ? json(*meta.group_id) : json(nullptr);
    for (const auto& [name, value] : meta.benchmarks) obj["benchmark:" + name] = value;
    obj["text"] = u.text;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, serialize_corpus(corpus));
}

std::vector<Rejection> merge_targets(Corpus& corpus, const std::filesystem::path& path,
                                     char delimiter, const TargetSchema& schema) {
  auto table = read_delimited_file(path, delimiter);
  std::vector<std::string> missing;
  std::vector<std::string> wanted = {schema.target_id, schema.display_name, schema.group_id};
  for (const auto& [name, column] : schema.benchmarks) wanted.push_back(column);
  for (const auto& c : wanted) {
    if (!c.empty() && table.column(c) < 0) missing.push_back(c);
  }
  if (!missing.empty()) {
    std::string msg = path.string() + ": missing mapped column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  std::vector<Rejection> rejected;
  auto cell = [&](const std::vector<std::string>& row, const std::string& column)
      -> std::optional<std::string> {
    if (column.empty()) return std::nullopt;
    const auto& v = row[static_cast<std::size_t>(table.column(column))];
    if (is_missing_marker(v)) return std::nullopt;
    return std::string(trim(v));
  };
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto id = cell(row, schema.target_id);
    if (!id) {
      rejected.push_back({table.row_lines[r], "", "missing target id"});
      continue;
    }
    auto it = corpus.targets.find(*id);
    if (it == corpus.targets.end()) {
      rejected.push_back({table.row_lines[r], *id, "target not in corpus"});
      continue;
    }
    if (auto name = cell(row, schema.display_name)) it->second.display_name = *name;
    if (auto group = cell(row, schema.group_id)) it->second.group_id = *group;
    for (const auto& [bench, column] : schema.benchmarks) {
      auto v = cell(row, column);
      if (!v) continue;
      auto num = parse_number(*v);
      if (!num) {
        rejected.push_back({table.row_lines[r], *id, "non-numeric benchmark " + bench});
        continue;
      }
      it->second.benchmarks[bench] = *num;
    }
  }
  return rejected;
}

void write_rejections(const std::filesystem::path& path, const std::vector<Rejection>& rejected) {
  std::ostringstream out;
  const std::array<std::string, 3> header = {"line", "id", "reason"};
  write_delimited_row(out, header);
  for (const auto& r : rejected) {
    const std::array<std::string, 3> row = {std::to_string(r.line), r.id, r.reason};
    write_delimited_row(out, row);
  }
  write_file(path, out.str());
}

// --- segmentation ---

SegmentationMode parse_segmentation_mode(std::string_view s) {
  if (s == "dataset_provided") return SegmentationMode::kDatasetProvided;
  if (s == "rule_based") return SegmentationMode::kRuleBased;
  throw ConfigError("unknown segmentation mode '" + std::string(s) + "'");
}

namespace {

constexpr std::string_view kEllipsis = "\xE2\x80\xA6";

const std::set<std::string, std::less<>>& abbreviations() {
  static const std::set<std::string, std::less<>> kAbbrev = {
      "mr",  "mrs",  "ms",  "dr",   "prof", "st",  "jr",  "sr",   "vs",  "etc", "e.g",
      "i.e", "u.s",  "u.k", "inc",  "ltd",  "co",  "no",  "gen",  "sen", "rep", "gov",
      "art", "para", "fig", "approx", "cf", "vol", "pp",  "mt",   "ft",  "jan", "feb",
      "mar", "apr",  "jun", "jul",  "aug",  "sep", "sept", "oct", "nov", "dec", "hon"};
  return kAbbrev;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }

// Closing quote or bracket right after a terminator, returning its length.
std::size_t closer_length(std::string_view rest) {
  if (rest.empty()) return 0;
  if (rest[0] == '"' || rest[0] == '\'' || rest[0] == ')' || rest[0] == ']') return 1;
  if (rest.starts_with("\xE2\x80\x99") || rest.starts_with("\xE2\x80\x9D")) return 3;
  return 0;
}

bool starts_sentence(std::string_view rest) {
  // Skip one opening quote or bracket.
  if (!rest.empty() && (rest[0] == '"' || rest[0] == '\'' || rest[0] == '(' || rest[0] == '[')) {
    rest.remove_prefix(1);
  } else if (rest.starts_with("\xE2\x80\x98") || rest.starts_with("\xE2\x80\x9C")) {
    rest.remove_prefix(3);
  }
  if (rest.empty()) return false;
  const auto c = static_cast<unsigned char>(rest[0]);
  // Case is unknown for non-ASCII letters without a Unicode table, so they count.
  return is_ascii_upper(rest[0]) || c >= 0x80;
}

// True when the '.' at text[dot] ends an abbreviation or an initial.
bool guarded_period(std::string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(text[begin - 1]) && text[begin - 1] != '(' &&
         text[begin - 1] != '"') {
    --begin;
  }
  std::string word(text.substr(begin, dot - begin));
  if (word.empty()) return false;
  if (word.size() == 1 && is_ascii_upper(word[0])) return true;
  for (auto& ch : word) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return abbreviations().contains(word);
}

}  // namespace

std::vector<TextUnit> segment_sentences(const TextUnit& document, SegmentationMode mode) {
  if (mode == SegmentationMode::kDatasetProvided) return {document};

  const std::string_view text = document.text;
  std::vector<std::string> pieces;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool ellipsis = text.substr(i).starts_with(kEllipsis);
    const char c = text[i];
    if (!ellipsis && c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    // Consume the whole terminator run ("?!", "...", "…").
    std::size_t j = i;
    std::size_t run = 0;
    while (j < text.size()) {
      if (text.substr(j).starts_with(kEllipsis)) {
        j += kEllipsis.size();
      } else if (text[j] == '.' || text[j] == '!' || text[j] == '?') {
        ++j;
      } else {
        break;
      }
      ++run;
    }
    while (std::size_t n = closer_length(text.substr(j))) j += n;

    bool boundary = false;
    std::size_t k = j;
    while (k < text.size() && is_space(text[k])) ++k;
    if (k == text.size()) {
      boundary = true;
    } else if (k > j && starts_sentence(text.substr(k))) {
      boundary = !(run == 1 && c == '.' && guarded_period(text, i));
    }
    if (boundary) {
      auto piece = trim(text.substr(start, j - start));
      if (!piece.empty()) pieces.emplace_back(piece);
      start = k;
    }
    i = j > i ? j : i + 1;
  }
  if (auto tail = trim(text.substr(std::min(start, text.size()))); !tail.empty()) {
    pieces.emplace_back(tail);
  }
  if (pieces.empty()) pieces.emplace_back(trim(text));

  std::vector<TextUnit> out;
  out.reserve(pieces.size());
  for (std::size_t n = 0; n < pieces.size(); ++n) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, ":%04zu", n + 1);
    TextUnit s = document;
    s.unit_id = document.unit_id + suffix;
    s.text = std::move(pieces[n]);
    s.kind = UnitKind::kSentence;
    out.push_back(std::move(s));
  }
  return out;
}

Corpus segment_corpus(const Corpus& corpus, SegmentationMode mode) {
  if (mode == SegmentationMode::kDatasetProvided) return corpus;
  Corpus out;
  out.targets = corpus.targets;
  for (const auto& u : corpus.units) {
    if (u.kind != UnitKind::kDocument) {
      out.units.push_back(u);
      continue;
    }
    auto sentences = segment_sentences(u, mode);
    std::move(sentences.begin(), sentences.end(), std::back_inserter(out.units));
  }
  return out;
}

// --- sampling ---

ActorSample sample_actor_texts(const Corpus& corpus, std::size_t per_actor, std::uint64_t seed,
                               std::size_t min_required) {
  if (per_actor == 0) throw ConfigError("per_actor must be at least 1");
  std::map<std::string, std::vector<const TextUnit*>> by_actor;
  for (const auto& u : corpus.units) by_actor[u.target_id].push_back(&u);

  const std::size_t threshold = std::max(per_actor, min_required);
  ActorSample out;
  for (auto& [actor, units] : by_actor) {
    if (units.size() < threshold) {
      out.excluded.push_back({actor, units.size()});
      continue;
    }
    std::sort(units.begin(), units.end(),
              [](const TextUnit* a, const TextUnit* b) { return a->unit_id < b->unit_id; });
    Rng rng(derive_seed(seed, stable_hash(actor)));
    auto picks = rng.sample_without_replacement(units.size(), per_actor);
    std::sort(picks.begin(), picks.end());
    for (auto p : picks) out.corpus.units.push_back(*units[p]);
    out.corpus.targets.emplace(actor, corpus.targets.at(actor));
  }
  return out;
}

}  // namespace textpos
