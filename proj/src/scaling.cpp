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

#include "textpos/scaling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "textpos/delimited.hpp"
#include "textpos/numbers.hpp"

namespace textpos {
namespace {

// Runs job(i) for i in [0, n) on up to `parallelism` threads. After the first
// exception no new jobs start; the exception is rethrown once all workers end.
template <class Job>
void run_bounded(std::size_t n, std::size_t parallelism, Job&& job) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

void tally(ScaleStats* stats, const ScoreRecord& r) {
  if (!stats) return;
  switch (r.outcome.kind()) {
    case ParseOutcome::Kind::kNumeric:
      ++stats->numeric;
      break;
    case ParseOutcome::Kind::kNa:
      ++stats->na;
      break;
    case ParseOutcome::Kind::kMalformed:
      ++stats->malformed;
      break;
  }
}

PositionEstimate estimate_from_values(std::string target, std::string model, std::string preset,
                                      std::vector<double> values, std::size_t n_na,
                                      std::size_t n_malformed) {
  PositionEstimate e;
  e.target_id = std::move(target);
  e.model_id = std::move(model);
  e.preset_id = std::move(preset);
  e.n_numeric = values.size();
  e.n_na = n_na;
  e.n_malformed = n_malformed;
  if (!values.empty()) {
    // Summing in sorted order makes the mean independent of record order.
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    e.estimate = sum / static_cast<double>(values.size());
  }
  return e;
}

std::string list_ids(const std::vector<std::string>& ids, std::size_t limit = 20) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

}  // namespace

std::vector<ScoreRecord> scale_units(const Corpus& corpus, const PromptPreset& preset,
                                     Backend& backend, CacheStore& store,
                                     const ScaleOptions& options, ScaleStats* stats) {
  options.params.validate();
  preset.scale.validate();
  const std::size_t n = corpus.units.size();
  std::vector<ScoreRecord> records(n);
  std::vector<char> hit(n, 0);
  std::mutex progress_mu;
  ScaleProgress progress{0, n, 0};

  run_bounded(n, options.parallelism, [&](std::size_t i) {
    const TextUnit& unit = corpus.units[i];
    BackendRequest request{options.model_id, render_prompt(preset, unit.text, unit.unit_id),
                           options.params};
    auto cached = submit_cached(backend, request, store);
    ScoreRecord& r = records[i];
    r.unit_id = unit.unit_id;
    r.target_id = unit.target_id;
    r.model_id = options.model_id;
    r.preset_id = preset.preset_id;
    r.outcome = parse_score(cached.response.body, preset.scale);
    r.raw_digest = cached.response.request_digest;
    hit[i] = cached.cache_hit;
    if (options.on_progress) {
      std::lock_guard lock(progress_mu);
      ++progress.done;
      progress.cache_hits += cached.cache_hit;
      options.on_progress(progress);
    }
  });

  if (stats) {
    stats->requests += n;
    for (std::size_t i = 0; i < n; ++i) {
      stats->cache_hits += hit[i];
      tally(stats, records[i]);
    }
  }
  std::sort(records.begin(), records.end(),
            [](const ScoreRecord& a, const ScoreRecord& b) { return a.unit_id < b.unit_id; });
  return records;
}

std::vector<PositionEstimate> aggregate_positions(std::span<const ScoreRecord> records) {
  if (records.empty()) return {};
  const auto& model = records.front().model_id;
  const auto& preset = records.front().preset_id;
  struct Acc {
    std::vector<double> values;
    std::size_t na = 0;
    std::size_t malformed = 0;
  };
  std::map<std::string, Acc> by_target;
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (r.model_id != model || r.preset_id != preset) {
      throw DataError("records mix runs: (" + model + ", " + preset + ") and (" + r.model_id +
                      ", " + r.preset_id + ")");
    }
    if (!seen.insert(r.unit_id).second) throw DataError("duplicate record for unit " + r.unit_id);
    auto& acc = by_target[r.target_id];
    if (r.outcome.is_numeric()) {
      acc.values.push_back(r.outcome.value());
    } else if (r.outcome.is_na()) {
      ++acc.na;
    } else {
      ++acc.malformed;
    }
  }
  std::vector<PositionEstimate> out;
  out.reserve(by_target.size());
  for (auto& [target, acc] : by_target) {
    out.push_back(
        estimate_from_values(target, model, preset, std::move(acc.values), acc.na, acc.malformed));
  }
  return out;
}

TypicalityResult typicality_difference(std::span<const ScoreRecord> republican,
                                       std::span<const ScoreRecord> democratic) {
  std::map<std::string_view, const ScoreRecord*> rep;
  std::map<std::string_view, const ScoreRecord*> dem;
  for (const auto& r : republican) {
    if (!rep.emplace(r.unit_id, &r).second) throw DataError("duplicate unit " + r.unit_id);
  }
  for (const auto& r : democratic) {
    if (!dem.emplace(r.unit_id, &r).second) throw DataError("duplicate unit " + r.unit_id);
  }
  std::vector<std::string> only_rep;
  std::vector<std::string> only_dem;
  for (const auto& [id, r] : rep) {
    if (!dem.contains(id)) only_rep.emplace_back(id);
  }
  for (const auto& [id, r] : dem) {
    if (!rep.contains(id)) only_dem.emplace_back(id);
  }
  if (!only_rep.empty() || !only_dem.empty()) {
    std::string msg = "typicality runs cover different units.";
    if (!only_rep.empty()) msg += " Only in Republican run: " + list_ids(only_rep) + ".";
    if (!only_dem.empty()) msg += " Only in Democratic run: " + list_ids(only_dem) + ".";
    throw DataError(msg);
  }

  std::string model;
  if (!rep.empty()) {
    const auto& rm = rep.begin()->second->model_id;
    const auto& dm = dem.begin()->second->model_id;
    model = rm == dm ? rm : rm + "|" + dm;
  }

  struct Acc {
    std::vector<double> values;
    std::size_t na = 0;
    std::size_t malformed = 0;
  };
  std::map<std::string, Acc> by_target;
  TypicalityResult out;
  for (const auto& [id, r] : rep) {
    const ScoreRecord* d = dem.at(id);
    if (r->target_id != d->target_id) {
      throw DataError("unit " + r->unit_id + " has target " + r->target_id + " in one run and " +
                      d->target_id + " in the other");
    }
    UnitPosition u{r->unit_id, r->target_id, std::nullopt};
    auto& acc = by_target[r->target_id];
    if (r->outcome.is_numeric() && d->outcome.is_numeric()) {
      u.position = r->outcome.value() - d->outcome.value();
      acc.values.push_back(*u.position);
    } else if (r->outcome.is_malformed() || d->outcome.is_malformed()) {
      ++acc.malformed;
    } else {
      ++acc.na;
    }
    out.units.push_back(std::move(u));
  }
  for (auto& [target, acc] : by_target) {
    out.targets.push_back(estimate_from_values(target, model, std::string(kTypicalityPresetId),
                                               std::move(acc.values), acc.na, acc.malformed));
  }
  return out;
}

std::size_t estimate_tokens(std::string_view content, double chars_per_token) {
  if (chars_per_token <= 0.0) throw ConfigError("chars_per_token must be positive");
  return static_cast<std::size_t>(std::ceil(static_cast<double>(content.size()) / chars_per_token));
}

SinglePromptResult scale_single_prompt(const Corpus& corpus, const PromptPreset& preset,
                                       Backend& backend, CacheStore& store,
                                       const SinglePromptOptions& options) {
  options.scale.params.validate();
  preset.scale.validate();

  // Targets in id order, units in corpus order.
  std::map<std::string, std::vector<const TextUnit*>> by_target;
  for (const auto& u : corpus.units) by_target[u.target_id].push_back(&u);

  std::vector<std::string> targets;
  std::vector<BackendRequest> requests;
  std::vector<std::string> over_budget;
  for (const auto& [target, units] : by_target) {
    std::vector<std::string> texts;
    std::vector<std::string> ids;
    for (const auto* u : units) {
      texts.push_back(u->text);
      ids.push_back(u->unit_id);
    }
    RenderedMessage message;
    if (options.layout == SinglePromptLayout::kConcatenated) {
      message = render_concatenated(preset, texts, options.separator, ids);
    } else {
      std::string joined;
      for (std::size_t i = 0; i < texts.size(); ++i) joined += (i ? " " : "") + texts[i];
      message = render_prompt(preset, joined);
      message.unit_ids = ids;
    }
    const std::size_t tokens = estimate_tokens(message.content, options.chars_per_token) +
                               static_cast<std::size_t>(options.scale.params.max_tokens);
    if (tokens > options.context_budget_tokens) {
      over_budget.push_back(target + " (~" + std::to_string(tokens) + " tokens)");
    }
    targets.push_back(target);
    requests.push_back({options.scale.model_id, std::move(message), options.scale.params});
  }
  if (!over_budget.empty()) {
    throw ContextBudgetError("context budget of " + std::to_string(options.context_budget_tokens) +
                             " tokens exceeded by: " + list_ids(over_budget));
  }

  SinglePromptResult out;
  out.records.resize(targets.size());
  run_bounded(targets.size(), options.scale.parallelism, [&](std::size_t i) {
    auto cached = submit_cached(backend, requests[i], store);
    ScoreRecord& r = out.records[i];
    r.unit_id = targets[i];
    r.target_id = targets[i];
    r.model_id = options.scale.model_id;
    r.preset_id = preset.preset_id;
    r.outcome = parse_score(cached.response.body, preset.scale);
    r.raw_digest = cached.response.request_digest;
  });
  out.estimates = aggregate_positions(out.records);
  return out;
}

// --- serialization ---

namespace {

using nlohmann::ordered_json;

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

ordered_json record_json(const ScoreRecord& r) {
  ordered_json j;
  j["unit_id"] = r.unit_id;
  j["target_id"] = r.target_id;
  j["model_id"] = r.model_id;
  j["preset_id"] = r.preset_id;
  j["outcome"] = std::string(to_string(r.outcome.kind()));
  j["score"] = r.outcome.is_numeric() ? ordered_json(r.outcome.value()) : ordered_json(nullptr);
  j["reason"] = r.outcome.reason();
  j["raw_digest"] = r.raw_digest;
  return j;
}

std::string csv_line(std::initializer_list<std::string> fields) {
  std::ostringstream out;
  std::vector<std::string> v(fields);
  write_delimited_row(out, v);
  return out.str();
}

}  // namespace

std::string records_to_jsonl(std::span<const ScoreRecord> records) {
  std::string out;
  for (const auto& r : records) out += record_json(r).dump() + "\n";
  return out;
}

std::string records_to_csv(std::span<const ScoreRecord> records) {
  std::string out = csv_line(
      {"unit_id", "target_id", "model_id", "preset_id", "outcome", "score", "reason", "raw_digest"});
  for (const auto& r : records) {
    out += csv_line({r.unit_id, r.target_id, r.model_id, r.preset_id,
                     std::string(to_string(r.outcome.kind())),
                     r.outcome.is_numeric() ? format_number(r.outcome.value()) : "NA",
                     r.outcome.reason(), r.raw_digest});
  }
  return out;
}

std::vector<ScoreRecord> records_from_jsonl(std::string_view content) {
  std::vector<ScoreRecord> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError("records line " + std::to_string(line_no) + ": not a JSON object");
    }
    try {
      ScoreRecord r;
      r.unit_id = j.at("unit_id").get<std::string>();
      r.target_id = j.at("target_id").get<std::string>();
      r.model_id = j.at("model_id").get<std::string>();
      r.preset_id = j.at("preset_id").get<std::string>();
      r.raw_digest = j.value("raw_digest", "");
      const auto kind = j.at("outcome").get<std::string>();
      if (kind == "numeric") {
        r.outcome = ParseOutcome::numeric(j.at("score").get<double>());
      } else if (kind == "na") {
        r.outcome = ParseOutcome::na();
      } else if (kind == "malformed") {
        r.outcome = ParseOutcome::malformed(j.value("reason", ""));
      } else {
        throw DataError("unknown outcome '" + kind + "'");
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string estimates_to_jsonl(std::span<const PositionEstimate> estimates) {
  std::string out;
  for (const auto& e : estimates) {
    ordered_json j;
    j["target_id"] = e.target_id;
    j["model_id"] = e.model_id;
    j["preset_id"] = e.preset_id;
    j["estimate"] = e.estimate ? ordered_json(*e.estimate) : ordered_json(nullptr);
    j["n_numeric"] = e.n_numeric;
    j["n_na"] = e.n_na;
    j["n_malformed"] = e.n_malformed;
    j["coverage"] = e.coverage();
    out += j.dump() + "\n";
  }
  return out;
}

std::string estimates_to_csv(std::span<const PositionEstimate> estimates) {
  std::string out = csv_line({"target_id", "model_id", "preset_id", "estimate", "n_numeric", "n_na",
                              "n_malformed", "coverage"});
  for (const auto& e : estimates) {
    out += csv_line({e.target_id, e.model_id, e.preset_id, opt_number(e.estimate),
                     std::to_string(e.n_numeric), std::to_string(e.n_na),
                     std::to_string(e.n_malformed), format_number(e.coverage())});
  }
  return out;
}

std::vector<PositionEstimate> estimates_from_csv(std::string_view content) {
  auto table = parse_delimited(content, ',');
  const std::vector<std::string> required = {"target_id", "estimate"};
  std::vector<std::string> missing;
  for (const auto& c : required) {
    if (table.column(c) < 0) missing.push_back(c);
  }
  if (!missing.empty()) throw DataError("estimates file missing column(s): " + list_ids(missing));
  auto get = [&](const std::vector<std::string>& row, std::string_view c) -> std::string {
    const int i = table.column(c);
    return i < 0 ? std::string() : row[static_cast<std::size_t>(i)];
  };
  auto count = [&](const std::vector<std::string>& row, std::string_view c) -> std::size_t {
    auto v = parse_number(get(row, c));
    return v ? static_cast<std::size_t>(*v) : 0;
  };
  std::vector<PositionEstimate> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    PositionEstimate e;
    e.target_id = get(row, "target_id");
    e.model_id = get(row, "model_id");
    e.preset_id = get(row, "preset_id");
    const auto raw = get(row, "estimate");
    if (!is_missing_marker(raw)) {
      e.estimate = parse_number(raw);
      if (!e.estimate) {
        throw DataError("estimates line " + std::to_string(table.row_lines[r]) +
                        ": non-numeric estimate '" + raw + "'");
      }
    }
    e.n_numeric = count(row, "n_numeric");
    e.n_na = count(row, "n_na");
    e.n_malformed = count(row, "n_malformed");
    out.push_back(std::move(e));
  }
  return out;
}

std::string unit_positions_to_csv(std::span<const UnitPosition> units) {
  std::string out = csv_line({"unit_id", "target_id", "position"});
  for (const auto& u : units) out += csv_line({u.unit_id, u.target_id, opt_number(u.position)});
  return out;
}

}  // namespace textpos
