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

#include "textpos/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "textpos/backend.hpp"
#include "textpos/cache_store.hpp"
#include "textpos/corpus.hpp"
#include "textpos/delimited.hpp"
#include "textpos/digest.hpp"
#include "textpos/errors.hpp"
#include "textpos/eval.hpp"
#include "textpos/http_backend.hpp"
#include "textpos/mock_backend.hpp"
#include "textpos/naive_bayes.hpp"
#include "textpos/numbers.hpp"
#include "textpos/prompting.hpp"
#include "textpos/rating_table.hpp"
#include "textpos/scaling.hpp"

namespace textpos {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// Object-valued keys whose members are user-defined.
const std::set<std::string, std::less<>> kOpenMaps = {
    "corpus.columns.benchmarks", "corpus.targets.columns.benchmarks", "model.mock.table"};

const char* type_name(const Json& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "object";
  return "null";
}

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return true;
  return std::string_view(type_name(a)) == type_name(b);
}

void check_against(const Json& value, const Json& reference, const std::string& path) {
  if (!same_kind(value, reference)) {
    throw ConfigError("config key '" + path + "' must be a " + type_name(reference) + ", got " +
                      type_name(value));
  }
  if (!value.is_object() || kOpenMaps.count(path)) return;
  for (const auto& [key, member] : value.items()) {
    const std::string sub = path.empty() ? key : path + "." + key;
    if (!reference.contains(key)) throw ConfigError("unknown config key '" + sub + "'");
    check_against(member, reference.at(key), sub);
  }
}

void merge_into(Json& base, const Json& patch, const std::string& path) {
  for (const auto& [key, value] : patch.items()) {
    const std::string sub = path.empty() ? key : path + "." + key;
    if (value.is_object() && base.contains(key) && base[key].is_object() && !kOpenMaps.count(sub)) {
      merge_into(base[key], value, sub);
    } else {
      base[key] = value;
    }
  }
}

std::vector<std::string> split_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.emplace_back(key.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

void apply_override(Json& config, const ConfigOverride& o) {
  const auto parts = split_key(o.first);
  Json* node = &config;
  std::string walked;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    walked += (walked.empty() ? "" : ".") + parts[i];
    if (parts[i].empty() || !node->is_object()) throw ConfigError("bad override key '" + o.first + "'");
    if (!node->contains(parts[i])) {
      if (!kOpenMaps.count(walked)) throw ConfigError("unknown config key '" + walked + "'");
      (*node)[parts[i]] = Json::object();
    }
    node = &(*node)[parts[i]];
  }
  if (parts.back().empty()) throw ConfigError("bad override key '" + o.first + "'");
  Json& slot = (*node)[parts.back()];
  if (slot.is_string()) {
    slot = o.second;
    return;
  }
  auto parsed = Json::parse(o.second, nullptr, false);
  slot = parsed.is_discarded() ? Json(o.second) : parsed;
}

// ---------------------------------------------------------------------------
// Run bookkeeping

class Run {
 public:
  Run(std::string command, const Json& config, std::ostream& log)
      : command_(std::move(command)), config_(config), log_(log), started_(utc_timestamp()) {
    out_ = config.at("output_dir").get<std::string>();
    if (out_.empty()) throw ConfigError("output_dir must not be empty");
    fs::create_directories(out_);
    write_output(command_ + ".config.json", config.dump(2) + "\n");
  }

  const fs::path& out() const { return out_; }
  std::ostream& log() { return log_; }

  void input(const std::string& role, const fs::path& path) {
    inputs_.push_back({{"role", role}, {"path", path.generic_string()},
                       {"sha256", sha256_hex(read_file(path))}});
  }

  void preset(const PromptPreset& p) {
    for (const auto& e : presets_) {
      if (e.at("id") == p.preset_id) return;
    }
    presets_.push_back({{"id", p.preset_id}, {"digest", p.digest()}});
  }

  void model(const std::string& id, const std::string& backend) {
    models_.push_back({{"id", id}, {"backend", backend}});
  }

  void cache_stats(const fs::path& path, std::size_t requests, std::size_t hits, std::size_t calls) {
    cache_ = {{"path", path.generic_string()},
              {"requests", requests},
              {"hits", hits},
              {"hit_rate", requests == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(requests)},
              {"backend_calls", calls}};
  }

  void note(const std::string& key, Json value) { notes_[key] = std::move(value); }

  void write_output(const std::string& name, std::string_view content) {
    write_file(out_ / name, content);
    outputs_[name] = {{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}};
  }

  void finish() {
    Json m;
    m["tool"] = "textpos";
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["started_at"] = started_;
    m["finished_at"] = utc_timestamp();
    m["config_sha256"] = sha256_hex(config_.dump());
    m["inputs"] = inputs_;
    m["presets"] = presets_;
    m["models"] = models_;
    if (!cache_.is_null()) m["cache"] = cache_;
    if (!notes_.empty()) m["notes"] = notes_;
    auto outputs = Json::array();
    for (auto& [name, entry] : outputs_) outputs.push_back(entry);
    m["outputs"] = std::move(outputs);
    write_file(out_ / (command_ + ".manifest.json"), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  const Json& config_;
  std::ostream& log_;
  std::string started_;
  fs::path out_;
  Json inputs_ = Json::array();
  Json presets_ = Json::array();
  Json models_ = Json::array();
  Json cache_;
  Json notes_ = Json::object();
  std::map<std::string, Json> outputs_;
};

// ---------------------------------------------------------------------------
// Config readers

std::string str(const Json& j, const char* key) { return j.at(key).get<std::string>(); }

std::size_t count(const Json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (v < 0 || std::floor(v) != v) {
    throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

char resolve_delimiter(const std::string& spec, const fs::path& path) {
  if (spec == "auto") return delimiter_for(path);
  if (spec == "tab" || spec == "\\t" || spec == "\t") return '\t';
  if (spec.size() == 1) return spec[0];
  throw ConfigError("delimiter must be 'auto', 'tab' or a single character, got '" + spec + "'");
}

InputFormat resolve_format(const std::string& spec, const fs::path& path) {
  if (spec == "delimited") return InputFormat::kDelimited;
  if (spec == "jsonl") return InputFormat::kJsonLines;
  if (spec != "auto") throw ConfigError("corpus.format must be auto, delimited or jsonl");
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".ndjson" ? InputFormat::kJsonLines : InputFormat::kDelimited;
}

std::map<std::string, std::string> string_map(const Json& j) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) {
      out[k] = v.get<std::string>();
    } else if (v.is_number()) {
      out[k] = format_number(v.get<double>());
    } else {
      throw ConfigError("value of '" + k + "' must be a string or number");
    }
  }
  return out;
}

ColumnSchema column_schema(const Json& corpus) {
  const auto& c = corpus.at("columns");
  ColumnSchema s;
  s.unit_id = str(c, "unit_id");
  s.target_id = str(c, "target_id");
  s.text = str(c, "text");
  s.group_id = str(c, "group_id");
  s.language = str(c, "language");
  s.kind = str(c, "kind");
  s.display_name = str(c, "display_name");
  s.target_group = str(c, "target_group");
  s.benchmark_prefix = str(c, "benchmark_prefix");
  s.benchmarks = string_map(c.at("benchmarks"));
  s.default_kind = parse_unit_kind(str(corpus, "default_kind"));
  return s;
}

fs::path required_path(const Json& j, const char* key, const std::string& label) {
  const auto p = str(j, key);
  if (p.empty()) throw ConfigError(label + " is not set");
  return p;
}

CorpusLoad load_configured_corpus(const Json& corpus, const fs::path& path, Run& run,
                                  const std::string& role) {
  LoadOptions opts;
  opts.format = resolve_format(str(corpus, "format"), path);
  opts.delimiter = resolve_delimiter(str(corpus, "delimiter"), path);
  opts.schema = column_schema(corpus);
  run.input(role, path);
  auto load = load_corpus(path, opts);
  run.log() << role << ": " << load.corpus.units.size() << " units, " << load.rejected.size()
            << " rejected rows\n";
  return load;
}

struct PreparedCorpus {
  Corpus corpus;
  std::vector<Rejection> rejected;
  std::vector<ExcludedActor> excluded;
};

// load -> target table -> segmentation -> per-actor sampling.
PreparedCorpus prepare_corpus(const Json& config, Run& run) {
  const auto& c = config.at("corpus");
  auto load = load_configured_corpus(c, required_path(c, "path", "corpus.path"), run, "corpus");
  PreparedCorpus out{std::move(load.corpus), std::move(load.rejected), {}};

  const auto& targets = c.at("targets");
  if (const auto tpath = str(targets, "path"); !tpath.empty()) {
    const auto& tc = targets.at("columns");
    TargetSchema ts;
    ts.target_id = str(tc, "target_id");
    ts.display_name = str(tc, "display_name");
    ts.group_id = str(tc, "group_id");
    ts.benchmarks = string_map(tc.at("benchmarks"));
    run.input("targets", tpath);
    auto rej = merge_targets(out.corpus, tpath, resolve_delimiter(str(targets, "delimiter"), tpath), ts);
    out.rejected.insert(out.rejected.end(), rej.begin(), rej.end());
  }

  const auto mode = parse_segmentation_mode(str(c, "segmentation"));
  if (mode == SegmentationMode::kRuleBased) {
    out.corpus = segment_corpus(out.corpus, mode);
    run.log() << "segmented into " << out.corpus.units.size() << " units\n";
  }

  const auto& sample = c.at("sample");
  if (const auto per_actor = count(sample, "per_actor"); per_actor > 0) {
    auto s = sample_actor_texts(out.corpus, per_actor, config.at("seed").get<std::uint64_t>(),
                                count(sample, "min_required"));
    out.corpus = std::move(s.corpus);
    out.excluded = std::move(s.excluded);
    run.log() << "sampled " << per_actor << " units per actor, " << out.excluded.size()
              << " actors excluded\n";
  }
  out.corpus.validate();
  if (out.corpus.units.empty()) throw DataError("corpus has no usable units");
  return out;
}

DecodingParams decoding_params(const Json& model) {
  const auto& p = model.at("params");
  DecodingParams d;
  d.temperature = p.at("temperature").get<double>();
  d.top_p = p.at("top_p").get<double>();
  d.max_tokens = static_cast<int>(count(p, "max_tokens"));
  d.json_mode = p.at("json_mode").get<bool>();
  d.validate();
  return d;
}

BackendHandle make_backend(const Json& model) {
  const auto kind = str(model, "backend");
  if (kind == "mock") {
    const auto& m = model.at("mock");
    const auto mode_name = str(m, "mode");
    MockMode mode;
    if (mode_name == "keyword_rule") {
      mode = MockMode::kKeywordRule;
    } else if (mode_name == "scripted") {
      mode = MockMode::kScripted;
    } else {
      throw ConfigError("model.mock.mode must be keyword_rule or scripted");
    }
    const auto unmapped_name = str(m, "unmapped");
    if (unmapped_name != "na" && unmapped_name != "error") {
      throw ConfigError("model.mock.unmapped must be na or error");
    }
    return std::make_shared<MockBackend>(
        mode, string_map(m.at("table")),
        unmapped_name == "na" ? UnmappedPolicy::kNa : UnmappedPolicy::kError, mock_backend_options());
  }

  HttpBackendConfig h;
  h.style = parse_api_style(kind);
  h.base_url = str(model, "base_url");
  if (h.base_url.empty()) throw ConfigError("model.base_url is required for backend '" + kind + "'");
  h.path = str(model, "path");
  h.api_key_env = str(model, "api_key_env");
  h.timeout = std::chrono::seconds(count(model, "timeout_seconds"));
  const auto& r = model.at("retry");
  h.options.retry.max_attempts = static_cast<int>(count(r, "max_attempts"));
  if (h.options.retry.max_attempts < 1) throw ConfigError("model.retry.max_attempts must be >= 1");
  h.options.retry.initial_backoff = std::chrono::milliseconds(count(r, "initial_backoff_ms"));
  h.options.retry.max_backoff = std::chrono::milliseconds(count(r, "max_backoff_ms"));
  h.options.retry.multiplier = r.at("multiplier").get<double>();
  h.options.requests_per_minute = model.at("requests_per_minute").get<double>();
  return std::make_shared<HttpBackend>(std::move(h));
}

ScaleOptions scale_options(const Json& model) {
  ScaleOptions o;
  o.model_id = str(model, "id");
  if (o.model_id.empty()) throw ConfigError("model.id must not be empty");
  o.params = decoding_params(model);
  o.parallelism = std::max<std::size_t>(1, count(model, "parallelism"));
  return o;
}

CacheStore open_cache(const Json& config) {
  const auto path = str(config.at("cache"), "path");
  if (path.empty()) return CacheStore();
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  return CacheStore::open(path);
}

void log_stats(Run& run, const std::string& label, const ScaleStats& s) {
  run.log() << label << ": " << s.requests << " requests, " << s.cache_hits << " cache hits, "
            << s.numeric << " numeric, " << s.na << " NA, " << s.malformed << " malformed\n";
}

std::string rejections_csv(const std::vector<Rejection>& rejected) {
  std::ostringstream out;
  write_delimited_row(out, std::vector<std::string>{"line", "id", "reason"});
  for (const auto& r : rejected) {
    write_delimited_row(out, std::vector<std::string>{std::to_string(r.line), r.id, r.reason});
  }
  return out.str();
}

// id -> optional value from a delimited file. Lists missing columns on error.
Series read_series(const fs::path& path, const std::string& id_column, const std::string& value_column,
                   const std::string& label) {
  const auto table = read_delimited_file(path, delimiter_for(path));
  std::vector<std::string> missing;
  const int id_col = table.column(id_column);
  const int value_col = table.column(value_column);
  if (id_col < 0) missing.push_back(id_column);
  if (value_col < 0) missing.push_back(value_column);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError(label + " file " + path.generic_string() + " is missing column(s): " + list);
  }
  Series out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto& id = row[static_cast<std::size_t>(id_col)];
    const auto& cell = row[static_cast<std::size_t>(value_col)];
    std::optional<double> value;
    if (!is_missing_marker(trim(cell))) {
      value = parse_number(cell);
      if (!value) {
        throw DataError(label + " line " + std::to_string(table.row_lines[i]) + ": '" + cell +
                        "' is not a number");
      }
    }
    if (!out.emplace(id, value).second) {
      throw DataError(label + " line " + std::to_string(table.row_lines[i]) + ": duplicate id '" +
                      id + "'");
    }
  }
  return out;
}

std::map<std::string, std::string, std::less<>> read_groups(const fs::path& path,
                                                            const std::string& id_column,
                                                            const std::string& group_column) {
  const auto table = read_delimited_file(path, delimiter_for(path));
  const int id_col = table.column(id_column);
  const int group_col = table.column(group_column);
  std::vector<std::string> missing;
  if (id_col < 0) missing.push_back(id_column);
  if (group_col < 0) missing.push_back(group_column);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("group file " + path.generic_string() + " is missing column(s): " + list);
  }
  std::map<std::string, std::string, std::less<>> out;
  for (const auto& row : table.rows) {
    const auto& g = row[static_cast<std::size_t>(group_col)];
    if (!is_missing_marker(trim(g))) out[row[static_cast<std::size_t>(id_col)]] = g;
  }
  return out;
}

struct LoadedRatings {
  std::string path;
  RatingTable table;
};

std::vector<LoadedRatings> load_ratings(const Json& eval, Run& run) {
  const auto& r = eval.at("ratings");
  std::vector<LoadedRatings> out;
  Scale scale;
  scale.min = r.at("scale_min").get<double>();
  scale.max = r.at("scale_max").get<double>();
  scale.validate();
  RatingColumns cols;
  cols.item_id = str(r, "item_column");
  cols.rater_id = str(r, "rater_column");
  cols.rating = str(r, "rating_column");
  const auto layout = parse_rating_layout(str(r, "layout"));
  for (const auto& p : r.at("paths")) {
    const fs::path path = p.get<std::string>();
    run.input("ratings", path);
    auto load = load_rating_table(path, layout, scale, cols, delimiter_for(path));
    run.log() << "ratings " << path.generic_string() << ": " << load.table.item_count() << " items, "
              << load.rejected.size() << " rejected cells, " << load.dropped_items.size()
              << " unrated items dropped\n";
    out.push_back({path.generic_string(), std::move(load.table)});
  }
  return out;
}

fs::path estimates_path(const Json& config) {
  const auto p = str(config.at("eval").at("estimates"), "path");
  return p.empty() ? fs::path(str(config, "output_dir")) / "estimates.csv" : fs::path(p);
}

Series load_estimates(const Json& config, Run& run) {
  const auto& e = config.at("eval").at("estimates");
  const auto path = estimates_path(config);
  run.input("estimates", path);
  return read_series(path, str(e, "id_column"), str(e, "value_column"), "estimates");
}

std::string eno_curve_csv(const EnoResult& e) {
  std::ostringstream out;
  write_delimited_row(out, std::vector<std::string>{"n", "human_correlation", "model_correlation"});
  for (std::size_t k = 0; k < e.correlation_by_n.size(); ++k) {
    write_delimited_row(out, std::vector<std::string>{std::to_string(k + 1),
                                                      format_number(e.correlation_by_n[k]),
                                                      format_number(e.model_correlation)});
  }
  return out.str();
}

EnoOptions eno_options(const Json& config) {
  const auto& e = config.at("eval").at("eno");
  EnoOptions o;
  o.min_ratings = count(e, "min_ratings");
  o.max_n = count(e, "max_n");
  o.repeats = count(e, "repeats");
  o.seed = config.at("seed").get<std::uint64_t>();
  return o;
}

const RatingTable& single_table(const std::vector<LoadedRatings>& ratings, const char* what) {
  if (ratings.size() != 1) {
    throw ConfigError(std::string(what) + " needs exactly one rating table in eval.ratings.paths");
  }
  return ratings.front().table;
}

template <class F>
int guarded(const std::string& command, std::ostream& log, F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "textpos " << command << ": configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BackendError& e) {
    log << "textpos " << command << ": backend failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    log << "textpos " << command << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

// ---------------------------------------------------------------------------
// Commands

void do_ingest(const Json& config, std::ostream& log) {
  Run run("ingest", config, log);
  auto prepared = prepare_corpus(config, run);
  run.write_output("corpus.jsonl", serialize_corpus(prepared.corpus));
  run.write_output("rejected.csv", rejections_csv(prepared.rejected));
  if (!prepared.excluded.empty()) {
    std::ostringstream out;
    write_delimited_row(out, std::vector<std::string>{"target_id", "available"});
    for (const auto& e : prepared.excluded) {
      write_delimited_row(out, std::vector<std::string>{e.target_id, std::to_string(e.available)});
    }
    run.write_output("excluded_actors.csv", out.str());
  }
  run.note("units", prepared.corpus.units.size());
  run.note("targets", prepared.corpus.targets.size());
  run.note("rejected_rows", prepared.rejected.size());
  run.finish();
}

void do_scale(const Json& config, std::ostream& log) {
  Run run("scale", config, log);
  const auto& model = config.at("model");
  const auto options = scale_options(model);
  const auto preset = resolve_preset(str(config, "preset"));
  run.preset(preset);
  auto backend = make_backend(model);
  run.model(options.model_id, backend->name());
  auto prepared = prepare_corpus(config, run);
  auto store = open_cache(config);

  ScaleStats stats;
  std::vector<ScoreRecord> records;
  try {
    records = scale_units(prepared.corpus, preset, *backend, store, options, &stats);
  } catch (...) {
    run.cache_stats(store.path(), stats.requests, stats.cache_hits, backend->call_count());
    throw;
  }
  log_stats(run, "scale", stats);
  const auto estimates = aggregate_positions(records);
  run.write_output("records.jsonl", records_to_jsonl(records));
  run.write_output("records.csv", records_to_csv(records));
  run.write_output("estimates.csv", estimates_to_csv(estimates));
  run.write_output("estimates.jsonl", estimates_to_jsonl(estimates));
  run.cache_stats(store.path(), stats.requests, stats.cache_hits, backend->call_count());
  run.finish();
}

void do_scale_single_prompt(const Json& config, std::ostream& log) {
  Run run("scale-single-prompt", config, log);
  const auto& model = config.at("model");
  const auto& sp = config.at("single_prompt");
  SinglePromptOptions options;
  options.scale = scale_options(model);
  const auto layout = str(sp, "layout");
  if (layout == "whole_document") {
    options.layout = SinglePromptLayout::kWholeDocument;
  } else if (layout == "concatenated") {
    options.layout = SinglePromptLayout::kConcatenated;
  } else {
    throw ConfigError("single_prompt.layout must be whole_document or concatenated");
  }
  options.context_budget_tokens = count(sp, "context_budget_tokens");
  options.chars_per_token = sp.at("chars_per_token").get<double>();
  if (!(options.chars_per_token > 0)) throw ConfigError("single_prompt.chars_per_token must be positive");

  const auto preset = resolve_preset(str(config, "preset"));
  run.preset(preset);
  auto backend = make_backend(model);
  run.model(options.scale.model_id, backend->name());
  auto prepared = prepare_corpus(config, run);
  auto store = open_cache(config);

  const std::size_t stored_before = store.size();
  auto result = scale_single_prompt(prepared.corpus, preset, *backend, store, options);
  const std::size_t misses = store.size() - stored_before;
  run.write_output("records.jsonl", records_to_jsonl(result.records));
  run.write_output("records.csv", records_to_csv(result.records));
  run.write_output("estimates.csv", estimates_to_csv(result.estimates));
  run.write_output("estimates.jsonl", estimates_to_jsonl(result.estimates));
  const std::size_t requests = result.records.size();
  run.cache_stats(store.path(), requests, requests - std::min(requests, misses), backend->call_count());
  run.finish();
}

void do_typicality(const Json& config, std::ostream& log) {
  Run run("typicality", config, log);
  const auto& model = config.at("model");
  const auto& t = config.at("typicality");
  const auto options = scale_options(model);
  const auto rep = resolve_preset(str(t, "republican_preset"));
  const auto dem = resolve_preset(str(t, "democratic_preset"));
  run.preset(rep);
  run.preset(dem);
  auto backend = make_backend(model);
  run.model(options.model_id, backend->name());
  auto prepared = prepare_corpus(config, run);
  auto store = open_cache(config);

  ScaleStats rep_stats, dem_stats;
  const auto rep_records = scale_units(prepared.corpus, rep, *backend, store, options, &rep_stats);
  const auto dem_records = scale_units(prepared.corpus, dem, *backend, store, options, &dem_stats);
  log_stats(run, "republican", rep_stats);
  log_stats(run, "democratic", dem_stats);
  const auto result = typicality_difference(rep_records, dem_records);
  run.write_output("records_republican.jsonl", records_to_jsonl(rep_records));
  run.write_output("records_democratic.jsonl", records_to_jsonl(dem_records));
  run.write_output("unit_positions.csv", unit_positions_to_csv(result.units));
  run.write_output("estimates.csv", estimates_to_csv(result.targets));
  run.write_output("estimates.jsonl", estimates_to_jsonl(result.targets));
  run.cache_stats(store.path(), rep_stats.requests + dem_stats.requests,
                  rep_stats.cache_hits + dem_stats.cache_hits, backend->call_count());
  run.finish();
}

void do_baseline(const Json& config, std::ostream& log) {
  Run run("baseline", config, log);
  const auto& b = config.at("baseline");
  const auto& c = config.at("corpus");
  auto train = load_configured_corpus(c, required_path(b.at("train"), "path", "baseline.train.path"),
                                      run, "train");
  auto predict = load_configured_corpus(
      c, required_path(b.at("predict"), "path", "baseline.predict.path"), run, "predict");

  std::set<std::string> train_ids;
  for (const auto& u : train.corpus.units) train_ids.insert(u.unit_id);
  std::vector<std::string> overlap;
  for (const auto& u : predict.corpus.units) {
    if (train_ids.count(u.unit_id)) overlap.push_back(u.unit_id);
  }
  if (!overlap.empty()) {
    std::string list;
    for (std::size_t i = 0; i < overlap.size() && i < 20; ++i) list += (i ? ", " : "") + overlap[i];
    if (overlap.size() > 20) list += ", ...";
    throw DataError(std::to_string(overlap.size()) +
                    " unit id(s) appear in both the training and the prediction corpus: " + list);
  }

  const auto dem_label = str(b.at("train"), "democratic_label");
  const auto rep_label = str(b.at("train"), "republican_label");
  std::vector<LabeledText> labeled;
  std::size_t unlabeled = 0;
  for (const auto& u : train.corpus.units) {
    const auto& g = u.group_id ? *u.group_id : train.corpus.targets[u.target_id].group_id.value_or("");
    if (g == dem_label) {
      labeled.push_back({u.unit_id, u.text, Party::kDemocratic});
    } else if (g == rep_label) {
      labeled.push_back({u.unit_id, u.text, Party::kRepublican});
    } else {
      ++unlabeled;
    }
  }
  if (unlabeled > 0) run.log() << "skipped " << unlabeled << " training units without a party label\n";
  const auto model = fit_naive_bayes(labeled, count(b, "vocab_size"));
  run.write_output("nb_model.json", model.to_json().dump(2) + "\n");

  std::vector<const TextUnit*> units;
  for (const auto& u : predict.corpus.units) units.push_back(&u);
  std::sort(units.begin(), units.end(),
            [](const TextUnit* a, const TextUnit* b) { return a->unit_id < b->unit_id; });
  std::vector<UnitPosition> positions;
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto* u : units) {
    const double p = model.position(u->text);
    positions.push_back({u->unit_id, u->target_id, p});
    auto& s = sums[u->target_id];
    s.first += p;
    ++s.second;
  }
  std::vector<PositionEstimate> estimates;
  for (const auto& [target, s] : sums) {
    PositionEstimate e;
    e.target_id = target;
    e.model_id = "naive_bayes";
    e.preset_id = "naive_bayes";
    e.estimate = s.first / static_cast<double>(s.second);
    e.n_numeric = s.second;
    estimates.push_back(std::move(e));
  }
  run.write_output("unit_positions.csv", unit_positions_to_csv(positions));
  run.write_output("estimates.csv", estimates_to_csv(estimates));
  run.model("naive_bayes", "local");
  run.finish();
}

void do_eval(const Json& config, std::ostream& log) {
  Run run("eval", config, log);
  const auto& ev = config.at("eval");
  const auto estimates = load_estimates(config, run);
  auto ratings = load_ratings(ev, run);

  Json metrics;
  metrics["estimates"] = estimates_path(config).generic_string();

  Series benchmark;
  std::map<std::string, std::string, std::less<>> groups;
  const auto& bm = ev.at("benchmark");
  if (const auto bpath = str(bm, "path"); !bpath.empty()) {
    run.input("benchmark", bpath);
    benchmark = read_series(bpath, str(bm, "id_column"), str(bm, "value_column"), "benchmark");
    if (const auto gcol = str(bm, "group_column"); !gcol.empty()) {
      groups = read_groups(bpath, str(bm, "id_column"), gcol);
    }
    metrics["benchmark"] = {{"source", "file"}, {"path", bpath}, {"column", str(bm, "value_column")}};
  } else if (!ratings.empty()) {
    std::vector<BenchmarkEstimates> per_source;
    for (const auto& r : ratings) per_source.push_back(benchmark_from_ratings(r.table));
    benchmark = average_benchmarks(per_source).as_series();
    metrics["benchmark"] = {{"source", "ratings"}, {"tables", ratings.size()}};
    if (ratings.size() > 1) {
      std::vector<NamedSeries> named;
      named.push_back({"estimates", estimates});
      for (std::size_t i = 0; i < ratings.size(); ++i) {
        named.push_back({ratings[i].path, per_source[i].as_series()});
      }
      const auto matrix = correlation_matrix(named);
      Json m;
      m["names"] = Json::array();
      for (const auto& n : named) m["names"].push_back(n.name);
      m["r"] = Json::array();
      for (const auto& row : matrix) {
        Json jr = Json::array();
        for (const auto& cell : row) jr.push_back(to_json(cell));
        m["r"].push_back(std::move(jr));
      }
      metrics["correlation_matrix"] = std::move(m);
    }
  } else {
    throw ConfigError("eval needs eval.benchmark.path or eval.ratings.paths");
  }

  const auto& g = ev.at("groups");
  if (const auto gpath = str(g, "path"); !gpath.empty()) {
    run.input("groups", gpath);
    auto more = read_groups(gpath, str(g, "id_column"), str(g, "group_column"));
    for (auto& [id, name] : more) groups.emplace(id, name);
  }

  const auto paired = pair_by_id(estimates, benchmark, groups);
  metrics["correlations"] = to_json(grouped_correlations(paired));

  if (ev.at("reliability").at("enabled").get<bool>()) {
    const auto& table = single_table(ratings, "reliability");
    const auto rel = reliability_split_half(table, count(ev.at("reliability"), "splits"),
                                            config.at("seed").get<std::uint64_t>());
    metrics["reliability"] = {{"method", "split_half_spearman_brown"},
                              {"splits", count(ev.at("reliability"), "splits")},
                              {"value", rel ? Json(*rel) : Json(nullptr)}};
  }
  if (ev.at("eno").at("enabled").get<bool>()) {
    const auto& table = single_table(ratings, "ENO");
    const auto eno = eno_curve(estimates, table, eno_options(config));
    metrics["eno"] = to_json(eno);
    run.write_output("eno_curve.csv", eno_curve_csv(eno));
  }
  if (const auto rpath = str(ev, "records"); !rpath.empty()) {
    const auto& table = single_table(ratings, "the NA diagnostic");
    run.input("records", rpath);
    const auto records = records_from_jsonl(read_file(rpath));
    metrics["na_diagnostic"] = to_json(na_diagnostic(records, table));
  }

  run.write_output("metrics.json", metrics.dump(2) + "\n");
  run.write_output("plot_data.csv", plot_data_csv(paired));
  const auto& overall = metrics["correlations"]["overall"];
  log << "overall r = " << overall["r"].dump() << " (n = " << overall["n"].dump() << ")\n";
  run.finish();
}

void do_eno(const Json& config, std::ostream& log) {
  Run run("eno", config, log);
  const auto estimates = load_estimates(config, run);
  const auto ratings = load_ratings(config.at("eval"), run);
  const auto& table = single_table(ratings, "eno");
  const auto eno = eno_curve(estimates, table, eno_options(config));
  run.write_output("eno.json", to_json(eno).dump(2) + "\n");
  run.write_output("eno_curve.csv", eno_curve_csv(eno));
  log << "model correlation " << format_number(eno.model_correlation) << ", ENO "
      << (eno.eno ? format_number(*eno.eno) : ">= " + std::to_string(eno.max_n)) << "\n";
  run.finish();
}

std::string fmt_r(const Json& c) {
  std::ostringstream out;
  if (c.at("r").is_null()) {
    out << "undefined";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", c.at("r").get<double>());
    out << buf;
  }
  out << " (n = " << c.at("n").get<std::size_t>() << ")";
  return out.str();
}

void do_report(const Json& config, std::ostream& log) {
  Run run("report", config, log);
  auto path = str(config.at("eval"), "metrics");
  if (path.empty()) path = (fs::path(str(config, "output_dir")) / "metrics.json").generic_string();
  run.input("metrics", path);
  const auto metrics = Json::parse(read_file(path), nullptr, false);
  if (metrics.is_discarded() || !metrics.contains("correlations")) {
    throw DataError(path + " is not a metrics report");
  }
  std::ostringstream out;
  out << "estimates: " << metrics.value("estimates", "") << "\n";
  const auto& c = metrics["correlations"];
  out << "overall: r = " << fmt_r(c["overall"]) << "\n";
  for (const auto& [name, g] : c["groups"].items()) out << "within " << name << ": r = " << fmt_r(g) << "\n";
  if (metrics.contains("reliability")) {
    out << "split-half reliability: " << metrics["reliability"]["value"].dump() << "\n";
  }
  if (metrics.contains("eno")) {
    const auto& e = metrics["eno"];
    out << "model correlation with a single rating: " << e["model_correlation"].dump() << "\n";
    out << "ENO: " << e["eno"].dump() << " over " << e["item_count"].dump() << " items\n";
    for (const auto& row : e["correlation_by_n"]) {
      out << "  N = " << row["n"].dump() << ": " << row["correlation"].dump() << "\n";
    }
  }
  if (metrics.contains("na_diagnostic")) {
    const auto& d = metrics["na_diagnostic"];
    out << "mean ratings, scored: " << d["mean_ratings_scored"].dump()
        << "; NA: " << d["mean_ratings_na"].dump() << "\n";
  }
  run.write_output("report.txt", out.str());
  log << out.str();
  run.finish();
}

}  // namespace

Json default_config() {
  return Json::parse(R"({
  "output_dir": "run",
  "seed": 1,
  "preset": "tweet_left_right",
  "corpus": {
    "path": "",
    "format": "auto",
    "delimiter": "auto",
    "default_kind": "sentence",
    "columns": {
      "unit_id": "unit_id",
      "target_id": "target_id",
      "text": "text",
      "group_id": "",
      "language": "",
      "kind": "",
      "display_name": "",
      "target_group": "",
      "benchmark_prefix": "",
      "benchmarks": {}
    },
    "targets": {
      "path": "",
      "delimiter": "auto",
      "columns": {"target_id": "target_id", "display_name": "", "group_id": "", "benchmarks": {}}
    },
    "segmentation": "dataset_provided",
    "sample": {"per_actor": 0, "min_required": 0}
  },
  "model": {
    "id": "mock",
    "backend": "mock",
    "base_url": "",
    "path": "/v1/chat/completions",
    "api_key_env": "",
    "timeout_seconds": 60,
    "parallelism": 1,
    "requests_per_minute": 60,
    "retry": {"max_attempts": 5, "initial_backoff_ms": 500, "max_backoff_ms": 30000, "multiplier": 2},
    "params": {"temperature": 0, "top_p": 1, "max_tokens": 20, "json_mode": true},
    "mock": {"mode": "keyword_rule", "table": {}, "unmapped": "na"}
  },
  "cache": {"path": "cache/responses.jsonl"},
  "single_prompt": {"layout": "whole_document", "context_budget_tokens": 128000, "chars_per_token": 4},
  "typicality": {"republican_preset": "typicality_republican", "democratic_preset": "typicality_democratic"},
  "baseline": {
    "train": {"path": "", "democratic_label": "D", "republican_label": "R"},
    "predict": {"path": ""},
    "vocab_size": 5000
  },
  "eval": {
    "estimates": {"path": "", "id_column": "target_id", "value_column": "estimate"},
    "benchmark": {"path": "", "id_column": "target_id", "value_column": "benchmark", "group_column": ""},
    "groups": {"path": "", "id_column": "target_id", "group_column": "group"},
    "ratings": {
      "paths": [],
      "layout": "long",
      "item_column": "item_id",
      "rater_column": "rater_id",
      "rating_column": "rating",
      "scale_min": 0,
      "scale_max": 100
    },
    "records": "",
    "reliability": {"enabled": false, "splits": 100},
    "eno": {"enabled": false, "min_ratings": 15, "max_n": 14, "repeats": 100},
    "metrics": ""
  }
})");
}

Json load_config_file(const fs::path& path) {
  auto j = Json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ConfigError(path.generic_string() + " is not a JSON object");
  }
  return j;
}

Json resolve_config(const Json& file_config, const std::vector<ConfigOverride>& overrides) {
  const Json defaults = default_config();
  check_against(file_config, defaults, "");
  Json config = defaults;
  merge_into(config, file_config, "");
  for (const auto& o : overrides) apply_override(config, o);
  check_against(config, defaults, "");
  for (const auto& p : config.at("eval").at("ratings").at("paths")) {
    if (!p.is_string()) throw ConfigError("eval.ratings.paths must hold strings");
  }
  if (!config.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
  return config;
}

int cmd_ingest(const Json& config, std::ostream& log) {
  return guarded("ingest", log, [&] { do_ingest(config, log); });
}
int cmd_scale(const Json& config, std::ostream& log) {
  return guarded("scale", log, [&] { do_scale(config, log); });
}
int cmd_scale_single_prompt(const Json& config, std::ostream& log) {
  return guarded("scale-single-prompt", log, [&] { do_scale_single_prompt(config, log); });
}
int cmd_typicality(const Json& config, std::ostream& log) {
  return guarded("typicality", log, [&] { do_typicality(config, log); });
}
int cmd_baseline(const Json& config, std::ostream& log) {
  return guarded("baseline", log, [&] { do_baseline(config, log); });
}
int cmd_eval(const Json& config, std::ostream& log) {
  return guarded("eval", log, [&] { do_eval(config, log); });
}
int cmd_eno(const Json& config, std::ostream& log) {
  return guarded("eno", log, [&] { do_eno(config, log); });
}
int cmd_report(const Json& config, std::ostream& log) {
  return guarded("report", log, [&] { do_report(config, log); });
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"ingest", "scale",    "scale-single-prompt",
                                                 "typicality", "baseline", "eval", "eno", "report"};
  return names;
}

int run_command(std::string_view name, const Json& config, std::ostream& log) {
  if (name == "ingest") return cmd_ingest(config, log);
  if (name == "scale") return cmd_scale(config, log);
  if (name == "scale-single-prompt") return cmd_scale_single_prompt(config, log);
  if (name == "typicality") return cmd_typicality(config, log);
  if (name == "baseline") return cmd_baseline(config, log);
  if (name == "eval") return cmd_eval(config, log);
  if (name == "eno") return cmd_eno(config, log);
  if (name == "report") return cmd_report(config, log);
  log << "unknown command '" << name << "'\n";
  return kExitUsage;
}

}  // namespace textpos
