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

#include <gtest/gtest.h>

#include <random>

#include "synthetic.hpp"
#include "textpos/errors.hpp"
#include "textpos/eval.hpp"

namespace textpos {
namespace {

using testing::two_pass_pearson;

TEST(Pearson, HandCase) {
  const std::vector<double> x{1, 2, 3}, y{1, 2, 4};
  EXPECT_NEAR(*pearson(x, y), 0.98198, 1e-5);
  EXPECT_NEAR(*pearson(x, y), 3.0 / std::sqrt(2.0 * 14.0 / 3.0), 1e-14);
}

TEST(Pearson, MatchesTwoPassOracle) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 3 + gen() % 60;
    const double shift = trial % 2 ? 1e4 : 0.0;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(shift + z(gen));
      y.push_back(0.5 * x.back() + z(gen));
    }
    EXPECT_NEAR(*pearson(x, y), two_pass_pearson(x, y), 1e-12);
  }
}

TEST(Pearson, AffineInvariance) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x, y, x2, y2;
    for (int i = 0; i < 20; ++i) {
      x.push_back(u(gen));
      y.push_back(x.back() + u(gen));
    }
    const double a = 0.5 + std::abs(u(gen)), c = -(0.5 + std::abs(u(gen)));
    const double b = u(gen), d = u(gen);
    for (int i = 0; i < 20; ++i) {
      x2.push_back(a * x[static_cast<std::size_t>(i)] + b);
      y2.push_back(c * y[static_cast<std::size_t>(i)] + d);
    }
    EXPECT_NEAR(*pearson(x2, y2), -*pearson(x, y), 1e-12);
    EXPECT_NEAR(*pearson(y, x), *pearson(x, y), 1e-15);
  }
}

TEST(Pearson, UndefinedCases) {
  const std::vector<double> two{1, 2}, const3{4, 4, 4}, three{1, 2, 3};
  EXPECT_FALSE(pearson(two, two).has_value());
  EXPECT_FALSE(pearson(const3, three).has_value());
  EXPECT_FALSE(pearson(three, const3).has_value());
  EXPECT_THROW(pearson(two, three), DataError);
  const std::vector<double> exact{1, 2, 3, 4}, scaled{2, 4, 6, 8};
  EXPECT_EQ(*pearson(exact, scaled), 1.0);
}

TEST(PearsonComplete, DropsIncompletePairs) {
  const std::vector<std::optional<double>> x{1, 2, std::nullopt, 3, 9};
  const std::vector<std::optional<double>> y{1, 2, 5, 4, std::nullopt};
  const auto c = pearson_complete(x, y);
  EXPECT_EQ(c.n, 3u);
  EXPECT_EQ(c.dropped, 2u);
  EXPECT_NEAR(*c.r, 0.98198, 1e-5);
  const std::vector<std::optional<double>> few{1, std::nullopt, 2};
  const auto u = pearson_complete(few, few);
  EXPECT_FALSE(u.r.has_value());
  EXPECT_FALSE(u.note.empty());
  EXPECT_TRUE(to_json(u).at("r").is_null());
  EXPECT_TRUE(to_json(u).contains("note"));
}

TEST(PairById, UnionSorted) {
  const Series est{{"b", 2.0}, {"a", 1.0}, {"c", std::nullopt}};
  const Series bench{{"a", 10.0}, {"d", 4.0}};
  const auto items = pair_by_id(est, bench, {{"a", "D"}, {"d", "R"}});
  ASSERT_EQ(items.size(), 4u);
  EXPECT_EQ(items[0].id, "a");
  EXPECT_EQ(items[0].benchmark, 10.0);
  EXPECT_EQ(items[0].group, "D");
  EXPECT_FALSE(items[1].benchmark.has_value());
  EXPECT_FALSE(items[3].estimate.has_value());
  EXPECT_EQ(items[3].group, "R");
  EXPECT_EQ(plot_data_csv(items), "id,estimate,benchmark,group\na,1,10,D\nb,2,NA,\nc,NA,NA,\nd,NA,4,R\n");
}

TEST(GroupedCorrelations, SubsetIdentity) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z(0, 1);
  const std::vector<std::string> names{"D", "R", "I"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PairedItem> items;
    const std::size_t n = 10 + gen() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      PairedItem p;
      p.id = testing::item_name(i);
      p.group = names[gen() % 3];
      p.estimate = z(gen);
      if (gen() % 10) p.benchmark = *p.estimate + z(gen);
      items.push_back(p);
    }
    const auto g = grouped_correlations(items);
    for (const auto& [name, result] : g.groups) {
      std::vector<double> x, y;
      for (const auto& p : items) {
        if (p.group == name && p.estimate && p.benchmark) {
          x.push_back(*p.estimate);
          y.push_back(*p.benchmark);
        }
      }
      EXPECT_EQ(result.n, x.size());
      EXPECT_EQ(result.r, pearson(x, y));
    }
    std::vector<double> x, y;
    for (const auto& p : items) {
      if (p.estimate && p.benchmark) {
        x.push_back(*p.estimate);
        y.push_back(*p.benchmark);
      }
    }
    EXPECT_EQ(g.overall.r, pearson(x, y));
  }
}

TEST(GroupedCorrelations, EmptyGroupIgnoredAndJsonShape) {
  std::vector<PairedItem> items;
  for (int i = 0; i < 6; ++i) {
    items.push_back({"x" + std::to_string(i), double(i), double(i * i), i < 3 ? "D" : "R"});
  }
  items.push_back({"y", 1.0, 2.0, ""});
  const auto g = grouped_correlations(items);
  EXPECT_EQ(g.groups.size(), 2u);
  const auto j = to_json(g);
  EXPECT_TRUE(j.at("groups").contains("D"));
  EXPECT_EQ(j.at("overall").at("n"), 7);
}

TEST(Benchmarks, MeansAndAveraging) {
  RatingTable t;
  t.add("a", "r1", 10.0);
  t.add("a", "r2", 30.0);
  t.add("a", "r3", std::nullopt);
  t.add("b", "r1", 70.0);
  const auto b = benchmark_from_ratings(t);
  EXPECT_EQ(b.values.at("a"), 20.0);
  EXPECT_EQ(b.counts.at("a"), 2u);
  EXPECT_EQ(b.values.at("b"), 70.0);

  BenchmarkEstimates other;
  other.values = {{"a", 40.0}, {"c", 5.0}};
  other.counts = {{"a", 3}, {"c", 1}};
  const std::vector<BenchmarkEstimates> both{b, other};
  const auto avg = average_benchmarks(both);
  EXPECT_EQ(avg.values.at("a"), 30.0);
  EXPECT_EQ(avg.counts.at("a"), 5u);
  EXPECT_EQ(avg.values.at("b"), 70.0);
  EXPECT_EQ(avg.values.at("c"), 5.0);
}

TEST(Eno, RecoversHeldOutRaterCount) {
  const auto sim = testing::simulate_raters(400, 15, 4, 10.0, 15.0, 21);
  EnoOptions o;
  o.repeats = 30;
  o.seed = 4;
  const auto e = eno_curve(sim.model, sim.table, o);
  ASSERT_TRUE(e.eno.has_value());
  EXPECT_GT(*e.eno, 2.5);
  EXPECT_LT(*e.eno, 5.5);
  EXPECT_EQ(e.correlation_by_n.size(), 14u);
  EXPECT_EQ(e.item_count, 400u);
  EXPECT_EQ(eno_curve(sim.model, sim.table, o).eno, e.eno);
}

TEST(Eno, InvariantToPositiveAffineModelTransform) {
  const auto sim = testing::simulate_raters(200, 15, 3, 10.0, 15.0, 22);
  Series shifted;
  for (const auto& [id, v] : sim.model) shifted[id] = 3.0 * *v - 40.0;
  EnoOptions o;
  o.repeats = 10;
  const auto a = eno_curve(sim.model, sim.table, o);
  const auto b = eno_curve(shifted, sim.table, o);
  ASSERT_TRUE(a.eno && b.eno);
  EXPECT_NEAR(*a.eno, *b.eno, 1e-9);
  EXPECT_NEAR(a.model_correlation, b.model_correlation, 1e-12);
}

TEST(Eno, SaturatesWhenModelIsTruth) {
  const auto sim = testing::simulate_raters(200, 15, 0, 10.0, 15.0, 23);
  EnoOptions o;
  o.repeats = 10;
  const auto e = eno_curve(sim.model, sim.table, o);
  EXPECT_TRUE(e.saturated());
  EXPECT_FALSE(e.nearest_n.has_value());
  EXPECT_EQ(to_json(e).at("eno"), ">= 14");
}

TEST(Eno, ItemFilterAndErrors) {
  auto sim = testing::simulate_raters(50, 15, 2, 10.0, 15.0, 24);
  sim.table.add("short", "r0", 50.0);
  sim.model["short"] = 50.0;
  sim.model.erase(testing::item_name(0));
  EnoOptions o;
  o.repeats = 5;
  EXPECT_EQ(eno_curve(sim.model, sim.table, o).item_count, 49u);

  EnoOptions bad = o;
  bad.max_n = 15;  // needs max_n + 1 ratings
  EXPECT_THROW(eno_curve(sim.model, sim.table, bad), ConfigError);
  bad = o;
  bad.repeats = 0;
  EXPECT_THROW(eno_curve(sim.model, sim.table, bad), ConfigError);
  bad = o;
  bad.min_ratings = 16;
  EXPECT_THROW(eno_curve(sim.model, sim.table, bad), DataError);
}

TEST(Reliability, DuplicatedRatersNearOne) {
  const auto r = reliability_split_half(testing::duplicated_rater_table(100, 8, 1), 20, 1);
  ASSERT_TRUE(r.has_value());
  EXPECT_GE(*r, 0.999);
}

TEST(Reliability, IndependentNoiseNearZero) {
  const auto r = reliability_split_half(testing::noise_table(500, 10, 2), 50, 2);
  ASSERT_TRUE(r.has_value());
  EXPECT_LT(std::abs(*r), 0.1);
}

TEST(Reliability, ModestNoiseIsIntermediateAndGrowsWithItemSpread) {
  const auto narrow = reliability_split_half(testing::simulate_raters(300, 10, 0, 5.0, 15.0, 3).table, 30, 3);
  const auto wide = reliability_split_half(testing::simulate_raters(300, 10, 0, 12.0, 15.0, 3).table, 30, 3);
  ASSERT_TRUE(narrow && wide);
  EXPECT_GT(*narrow, 0.1);
  EXPECT_LT(*wide, 0.999);
  EXPECT_LT(*narrow, *wide);
}

TEST(Reliability, UndefinedOnTinyTables) {
  RatingTable t;
  t.add("a", "r1", 1.0);
  t.add("a", "r2", 2.0);
  t.add("b", "r1", 3.0);
  EXPECT_FALSE(reliability_split_half(t, 10, 0).has_value());
}

TEST(NaDiagnostic, FewerRatingsOnNaItems) {
  const auto s = testing::na_scenario(30, 10, 12, 4);
  const auto d = na_diagnostic(s.records, s.table);
  EXPECT_EQ(d.n_scored, 30u);
  EXPECT_EQ(d.n_na, 10u);
  EXPECT_NEAR(*d.mean_ratings_scored, 13.0, 1e-12);
  EXPECT_NEAR(*d.mean_ratings_na, 4.5, 1e-12);
  EXPECT_TRUE(d.consistent_with_fewer_ratings());
  EXPECT_EQ(to_json(d).at("fewer_ratings_when_na"), true);
}

TEST(NaDiagnostic, MalformedCountsAsNotScoredAndUnmatched) {
  auto s = testing::na_scenario(3, 0, 5, 0);
  s.records[0].outcome = ParseOutcome::malformed("x");
  ScoreRecord stray = s.records[1];
  stray.unit_id = "nowhere";
  stray.target_id = "nowhere";
  s.records.push_back(stray);
  const auto d = na_diagnostic(s.records, s.table);
  EXPECT_EQ(d.n_na, 1u);
  EXPECT_EQ(d.n_scored, 2u);
  EXPECT_EQ(d.n_unmatched, 1u);
}

TEST(CorrelationMatrix, SymmetricWithUnitDiagonal) {
  const std::vector<NamedSeries> series{
      {"en", {{"a", 1.0}, {"b", 2.0}, {"c", 3.0}, {"d", 5.0}}},
      {"de", {{"a", 2.0}, {"b", 1.0}, {"c", 4.0}, {"d", 6.0}}},
      {"fr", {{"a", 1.0}, {"b", std::nullopt}, {"c", 2.0}, {"e", 4.0}}}};
  const auto m = correlation_matrix(series);
  ASSERT_EQ(m.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m[i][j].r, m[j][i].r);
  }
  EXPECT_NEAR(*m[0][0].r, 1.0, 1e-15);
  EXPECT_FALSE(m[0][2].r.has_value());  // only a and c overlap
  EXPECT_EQ(m[0][2].n, 2u);
}

TEST(SeriesFromEstimates, DuplicateTargetRejected) {
  PositionEstimate e;
  e.target_id = "T";
  e.estimate = 4.0;
  const std::vector<PositionEstimate> one{e}, two{e, e};
  EXPECT_EQ(series_from_estimates(one).at("T"), 4.0);
  EXPECT_THROW(series_from_estimates(two), DataError);
}

}  // namespace
}  // namespace textpos
