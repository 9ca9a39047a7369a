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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "textpos/rating_table.hpp"
#include "textpos/scaling.hpp"

namespace textpos {

using Series = std::map<std::string, std::optional<double>, std::less<>>;

struct BenchmarkEstimates {
  std::map<std::string, double, std::less<>> values;
  std::map<std::string, std::size_t, std::less<>> counts;

  Series as_series() const;
};

// Per-item mean over non-missing cells.
BenchmarkEstimates benchmark_from_ratings(const RatingTable& table);

// Item-wise simple mean of several benchmarks (e.g. one per language). An item
// is averaged over the sources that contain it; counts are summed.
BenchmarkEstimates average_benchmarks(std::span<const BenchmarkEstimates> sources);

// Product-moment correlation. Empty when fewer than 3 pairs or either side has
// zero variance. Throws DataError on a length mismatch.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationResult {
  std::optional<double> r;
  std::size_t n = 0;        // complete pairs used
  std::size_t dropped = 0;  // pairs with an absent side
  std::string note;         // why r is undefined, if it is
};

// Pairwise-complete Pearson.
CorrelationResult pearson_complete(std::span<const std::optional<double>> x,
                                   std::span<const std::optional<double>> y);

struct PairedItem {
  std::string id;
  std::optional<double> estimate;
  std::optional<double> benchmark;
  std::string group;  // empty when unknown
};

// Joins on id over the union of both key sets, sorted by id.
std::vector<PairedItem> pair_by_id(const Series& estimates, const Series& benchmark,
                                   const std::map<std::string, std::string, std::less<>>& groups = {});

struct GroupedCorrelations {
  CorrelationResult overall;
  std::map<std::string, CorrelationResult> groups;
};

// Overall r over all items; per-group r over the items of each non-empty group.
GroupedCorrelations grouped_correlations(std::span<const PairedItem> items);

struct EnoOptions {
  std::size_t min_ratings = 15;
  std::size_t max_n = 14;
  std::size_t repeats = 100;
  std::uint64_t seed = 0;
};

struct EnoResult {
  std::vector<double> correlation_by_n;  // index N - 1, N = 1..max_n
  double model_correlation = 0.0;
  // Interpolated ENO; empty when the human curve never reaches the model.
  std::optional<double> eno;
  // Smallest N whose mean correlation reaches the model; empty when saturated.
  std::optional<std::size_t> nearest_n;
  std::size_t repeats = 0;
  std::size_t min_ratings = 0;
  std::size_t max_n = 0;
  std::size_t item_count = 0;

  bool saturated() const { return !eno.has_value(); }
};

// Each repeat draws one criterion rating per item and compares N-rating means
// of the remaining ratings with the model. Only items with at least
// min_ratings ratings and a present model estimate take part. Throws
// ConfigError on bad options and DataError when no item qualifies.
EnoResult eno_curve(const Series& model, const RatingTable& table, const EnoOptions& options);

// Mean over random splits of the Spearman-Brown stepped-up correlation between
// half-means, over items with at least two ratings. Each split's value is
// clamped to [-1, 1]. Empty when no split yields a defined correlation.
std::optional<double> reliability_split_half(const RatingTable& table, std::size_t splits = 100,
                                             std::uint64_t seed = 0);

struct NaDiagnostic {
  std::optional<double> mean_ratings_scored;
  std::optional<double> mean_ratings_na;
  std::size_t n_scored = 0;
  std::size_t n_na = 0;         // NA or malformed outcomes
  std::size_t n_unmatched = 0;  // records without a rating-table item

  // True when both means exist and NA'd items drew fewer ratings.
  bool consistent_with_fewer_ratings() const {
    return mean_ratings_scored && mean_ratings_na && *mean_ratings_na < *mean_ratings_scored;
  }
};

NaDiagnostic na_diagnostic(std::span<const ScoreRecord> records, const RatingTable& table);

struct NamedSeries {
  std::string name;
  Series values;
};

// Pairwise-complete correlations between every pair of series, matched on id.
std::vector<std::vector<CorrelationResult>> correlation_matrix(std::span<const NamedSeries> series);

nlohmann::ordered_json to_json(const CorrelationResult& c);
nlohmann::ordered_json to_json(const GroupedCorrelations& g);
nlohmann::ordered_json to_json(const EnoResult& e);
nlohmann::ordered_json to_json(const NaDiagnostic& d);

// Columns: id,estimate,benchmark,group.
std::string plot_data_csv(std::span<const PairedItem> items);

// target_id -> estimate.
Series series_from_estimates(std::span<const PositionEstimate> estimates);

}  // namespace textpos
