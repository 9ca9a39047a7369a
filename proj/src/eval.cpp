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

#include "textpos/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "textpos/delimited.hpp"
#include "textpos/errors.hpp"
#include "textpos/numbers.hpp"
#include "textpos/random.hpp"

namespace textpos {
namespace {

double mean_of(std::span<const double> v, std::size_t count) {
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s += v[i];
  return s / static_cast<double>(count);
}

std::string fmt_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("NA");
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

Series BenchmarkEstimates::as_series() const {
  Series s;
  for (const auto& [id, v] : values) s.emplace(id, v);
  return s;
}

BenchmarkEstimates benchmark_from_ratings(const RatingTable& table) {
  BenchmarkEstimates out;
  for (std::size_t i = 0; i < table.item_count(); ++i) {
    const auto values = table.ratings(i);
    if (values.empty()) continue;
    out.values[table.items()[i]] = mean_of(values, values.size());
    out.counts[table.items()[i]] = values.size();
  }
  return out;
}

BenchmarkEstimates average_benchmarks(std::span<const BenchmarkEstimates> sources) {
  std::map<std::string, std::vector<double>> collected;
  BenchmarkEstimates out;
  for (const auto& src : sources) {
    for (const auto& [id, v] : src.values) {
      collected[id].push_back(v);
      auto c = src.counts.find(id);
      out.counts[id] += c == src.counts.end() ? 0 : c->second;
    }
  }
  for (const auto& [id, vs] : collected) out.values[id] = mean_of(vs, vs.size());
  return out;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) return std::nullopt;
  // Centered two-pass sums; stable under large offsets.
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  if (!std::isfinite(r)) return std::nullopt;
  return std::clamp(r, -1.0, 1.0);
}

CorrelationResult pearson_complete(std::span<const std::optional<double>> x,
                                   std::span<const std::optional<double>> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  std::vector<double> xs, ys;
  CorrelationResult out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) {
      xs.push_back(*x[i]);
      ys.push_back(*y[i]);
    } else {
      ++out.dropped;
    }
  }
  out.n = xs.size();
  out.r = pearson(xs, ys);
  if (!out.r) out.note = out.n < 3 ? "fewer than 3 complete pairs" : "zero variance";
  return out;
}

std::vector<PairedItem> pair_by_id(const Series& estimates, const Series& benchmark,
                                   const std::map<std::string, std::string, std::less<>>& groups) {
  std::set<std::string, std::less<>> ids;
  for (const auto& [id, v] : estimates) ids.insert(id);
  for (const auto& [id, v] : benchmark) ids.insert(id);
  std::vector<PairedItem> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    PairedItem p;
    p.id = id;
    if (auto it = estimates.find(id); it != estimates.end()) p.estimate = it->second;
    if (auto it = benchmark.find(id); it != benchmark.end()) p.benchmark = it->second;
    if (auto it = groups.find(id); it != groups.end()) p.group = it->second;
    out.push_back(std::move(p));
  }
  return out;
}

GroupedCorrelations grouped_correlations(std::span<const PairedItem> items) {
  auto correlate = [](const std::vector<const PairedItem*>& subset) {
    std::vector<std::optional<double>> x, y;
    for (const auto* p : subset) {
      x.push_back(p->estimate);
      y.push_back(p->benchmark);
    }
    return pearson_complete(x, y);
  };
  std::vector<const PairedItem*> all;
  std::map<std::string, std::vector<const PairedItem*>> by_group;
  for (const auto& p : items) {
    all.push_back(&p);
    if (!p.group.empty()) by_group[p.group].push_back(&p);
  }
  GroupedCorrelations out;
  out.overall = correlate(all);
  for (const auto& [g, subset] : by_group) out.groups[g] = correlate(subset);
  return out;
}

EnoResult eno_curve(const Series& model, const RatingTable& table, const EnoOptions& options) {
  if (options.max_n == 0) throw ConfigError("eno: max_n must be at least 1");
  if (options.min_ratings < 2 || options.max_n > options.min_ratings - 1) {
    throw ConfigError("eno: max_n must not exceed min_ratings - 1");
  }
  if (options.repeats == 0) throw ConfigError("eno: repeats must be at least 1");

  std::vector<std::vector<double>> ratings;
  std::vector<double> model_values;
  for (std::size_t i = 0; i < table.item_count(); ++i) {
    auto it = model.find(table.items()[i]);
    if (it == model.end() || !it->second) continue;
    auto values = table.ratings(i);
    if (values.size() < options.min_ratings) continue;
    ratings.push_back(std::move(values));
    model_values.push_back(*it->second);
  }
  if (ratings.empty()) {
    throw DataError("eno: no item has " + std::to_string(options.min_ratings) +
                    " ratings and a model estimate");
  }

  const std::size_t items = ratings.size();
  std::vector<double> sum_by_n(options.max_n, 0.0);
  double sum_model = 0.0;
  std::vector<double> criterion(items);
  std::vector<std::vector<double>> averages(options.max_n, std::vector<double>(items));
  std::vector<double> pool;
  for (std::size_t rep = 0; rep < options.repeats; ++rep) {
    Rng rng(derive_seed(options.seed, rep));
    for (std::size_t i = 0; i < items; ++i) {
      pool = ratings[i];
      rng.shuffle(pool);
      criterion[i] = pool[0];
      double running = 0.0;
      for (std::size_t n = 1; n <= options.max_n; ++n) {
        running += pool[n];
        averages[n - 1][i] = running / static_cast<double>(n);
      }
    }
    auto r_model = pearson(criterion, model_values);
    if (!r_model) throw DataError("eno: model correlation undefined (constant input)");
    sum_model += *r_model;
    for (std::size_t n = 0; n < options.max_n; ++n) {
      auto r = pearson(criterion, averages[n]);
      if (!r) throw DataError("eno: human correlation undefined (constant ratings)");
      sum_by_n[n] += *r;
    }
  }

  EnoResult out;
  out.repeats = options.repeats;
  out.min_ratings = options.min_ratings;
  out.max_n = options.max_n;
  out.item_count = items;
  const double reps = static_cast<double>(options.repeats);
  out.model_correlation = sum_model / reps;
  for (double s : sum_by_n) out.correlation_by_n.push_back(s / reps);

  const auto& h = out.correlation_by_n;
  const double m = out.model_correlation;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k] < m) continue;
    out.nearest_n = k + 1;
    if (k == 0) {
      // Between zero raters (no information) and one.
      out.eno = h[0] > 0.0 ? std::max(0.0, m) / h[0] : 1.0;
    } else {
      const double step = h[k] - h[k - 1];
      out.eno = step > 0.0 ? static_cast<double>(k) + (m - h[k - 1]) / step
                           : static_cast<double>(k + 1);
    }
    break;
  }
  return out;
}

std::optional<double> reliability_split_half(const RatingTable& table, std::size_t splits,
                                             std::uint64_t seed) {
  std::vector<std::vector<double>> ratings;
  for (std::size_t i = 0; i < table.item_count(); ++i) {
    auto values = table.ratings(i);
    if (values.size() >= 2) ratings.push_back(std::move(values));
  }
  if (ratings.size() < 3 || splits == 0) return std::nullopt;

  std::vector<double> a(ratings.size()), b(ratings.size());
  std::vector<double> pool;
  double total = 0.0;
  std::size_t defined = 0;
  for (std::size_t s = 0; s < splits; ++s) {
    Rng rng(derive_seed(seed, s));
    for (std::size_t i = 0; i < ratings.size(); ++i) {
      pool = ratings[i];
      rng.shuffle(pool);
      const std::size_t half = pool.size() / 2;
      a[i] = mean_of(pool, half);
      b[i] = mean_of(std::span<const double>(pool).subspan(half), pool.size() - half);
    }
    auto r = pearson(a, b);
    if (!r) continue;
    const double stepped = *r <= -1.0 ? -1.0 : 2.0 * *r / (1.0 + *r);
    total += std::clamp(stepped, -1.0, 1.0);
    ++defined;
  }
  if (defined == 0) return std::nullopt;
  return total / static_cast<double>(defined);
}

NaDiagnostic na_diagnostic(std::span<const ScoreRecord> records, const RatingTable& table) {
  NaDiagnostic out;
  double sum_scored = 0.0, sum_na = 0.0;
  for (const auto& r : records) {
    auto item = table.find_item(r.unit_id);
    if (!item) {
      ++out.n_unmatched;
      continue;
    }
    const double count = static_cast<double>(table.rating_count(*item));
    if (r.outcome.is_numeric()) {
      ++out.n_scored;
      sum_scored += count;
    } else {
      ++out.n_na;
      sum_na += count;
    }
  }
  if (out.n_scored > 0) out.mean_ratings_scored = sum_scored / static_cast<double>(out.n_scored);
  if (out.n_na > 0) out.mean_ratings_na = sum_na / static_cast<double>(out.n_na);
  return out;
}

std::vector<std::vector<CorrelationResult>> correlation_matrix(std::span<const NamedSeries> series) {
  const std::size_t k = series.size();
  std::vector<std::vector<CorrelationResult>> out(k, std::vector<CorrelationResult>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      auto paired = pair_by_id(series[i].values, series[j].values);
      std::vector<std::optional<double>> x, y;
      for (const auto& p : paired) {
        x.push_back(p.estimate);
        y.push_back(p.benchmark);
      }
      out[i][j] = pearson_complete(x, y);
      out[j][i] = out[i][j];
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const CorrelationResult& c) {
  nlohmann::ordered_json j;
  j["r"] = optional_json(c.r);
  j["n"] = c.n;
  j["dropped"] = c.dropped;
  if (!c.r) j["note"] = c.note;
  return j;
}

nlohmann::ordered_json to_json(const GroupedCorrelations& g) {
  nlohmann::ordered_json j;
  j["overall"] = to_json(g.overall);
  j["groups"] = nlohmann::ordered_json::object();
  for (const auto& [name, c] : g.groups) j["groups"][name] = to_json(c);
  return j;
}

nlohmann::ordered_json to_json(const EnoResult& e) {
  nlohmann::ordered_json j;
  j["item_count"] = e.item_count;
  j["min_ratings"] = e.min_ratings;
  j["max_n"] = e.max_n;
  j["repeats"] = e.repeats;
  j["model_correlation"] = e.model_correlation;
  auto curve = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < e.correlation_by_n.size(); ++k) {
    curve.push_back({{"n", k + 1}, {"correlation", e.correlation_by_n[k]}});
  }
  j["correlation_by_n"] = std::move(curve);
  if (e.eno) {
    j["eno"] = *e.eno;
  } else {
    j["eno"] = ">= " + std::to_string(e.max_n);
  }
  j["nearest_n"] = e.nearest_n ? nlohmann::ordered_json(*e.nearest_n) : nlohmann::ordered_json(nullptr);
  return j;
}

nlohmann::ordered_json to_json(const NaDiagnostic& d) {
  nlohmann::ordered_json j;
  j["mean_ratings_scored"] = optional_json(d.mean_ratings_scored);
  j["mean_ratings_na"] = optional_json(d.mean_ratings_na);
  j["n_scored"] = d.n_scored;
  j["n_na"] = d.n_na;
  j["n_unmatched"] = d.n_unmatched;
  j["fewer_ratings_when_na"] = d.consistent_with_fewer_ratings();
  return j;
}

std::string plot_data_csv(std::span<const PairedItem> items) {
  std::ostringstream out;
  const std::vector<std::string> header{"id", "estimate", "benchmark", "group"};
  write_delimited_row(out, header);
  for (const auto& p : items) {
    const std::vector<std::string> row{p.id, fmt_optional(p.estimate), fmt_optional(p.benchmark),
                                       p.group};
    write_delimited_row(out, row);
  }
  return out.str();
}

Series series_from_estimates(std::span<const PositionEstimate> estimates) {
  Series s;
  for (const auto& e : estimates) {
    if (!s.emplace(e.target_id, e.estimate).second) {
      throw DataError("duplicate target in estimates: " + e.target_id);
    }
  }
  return s;
}

}  // namespace textpos
