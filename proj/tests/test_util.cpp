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

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "textpos/delimited.hpp"
#include "textpos/digest.hpp"
#include "textpos/errors.hpp"
#include "textpos/numbers.hpp"
#include "textpos/random.hpp"

namespace textpos {
namespace {

TEST(Numbers, FormatIsShortestRoundTrip) {
  EXPECT_EQ(format_number(70.0), "70");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(0.001), "0.001");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.30000000000000004");
  for (double v : {1.0 / 3.0, 1e-300, 123456.789, -42.5}) {
    EXPECT_EQ(*parse_number(format_number(v)), v);
  }
}

TEST(Numbers, ParseRejectsGarbage) {
  EXPECT_EQ(parse_number(" 42 "), 42.0);
  EXPECT_EQ(parse_number("+7.5"), 7.5);
  EXPECT_EQ(parse_number("-3"), -3.0);
  EXPECT_FALSE(parse_number("42abc"));
  EXPECT_FALSE(parse_number(""));
  EXPECT_FALSE(parse_number("nan"));
  EXPECT_FALSE(parse_number("inf"));
  EXPECT_FALSE(parse_number("1e999"));
}

TEST(Numbers, MissingMarkers) {
  EXPECT_TRUE(is_missing_marker(""));
  EXPECT_TRUE(is_missing_marker("NA"));
  EXPECT_FALSE(is_missing_marker("na"));
  EXPECT_FALSE(is_missing_marker("0"));
}

TEST(Delimited, QuotedFieldsAndLineTracking) {
  const auto t = parse_delimited("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\"multi\nline\",2\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x, y");
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(t.rows[1][0], "multi\nline");
  EXPECT_EQ(t.row_lines, (std::vector<std::size_t>{2, 3}));
}

TEST(Delimited, BomCrlfShortAndLongRows) {
  const auto t = parse_delimited("\xEF\xBB\xBFid\tv\r\n1\r\n", '\t');
  EXPECT_EQ(t.header[0], "id");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"1", ""}));
  EXPECT_THROW(parse_delimited("a\n1,2\n"), DataError);
}

TEST(Delimited, WriteRoundTrip) {
  std::ostringstream out;
  const std::vector<std::string> row{"plain", "with,comma", "quote\"d", "line\nbreak"};
  write_delimited_row(out, row);
  const auto t = parse_delimited("h1,h2,h3,h4\n" + out.str());
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0], row);
}

TEST(Delimited, DelimiterFromExtension) {
  EXPECT_EQ(delimiter_for("x.tsv"), '\t');
  EXPECT_EQ(delimiter_for("x.tab"), '\t');
  EXPECT_EQ(delimiter_for("x.csv"), ',');
}

TEST(Files, WriteAndReadBack) {
  testing::TempDir dir;
  write_file(dir / "a.txt", std::string("bytes\0inside", 12));
  EXPECT_EQ(read_file(dir / "a.txt").size(), 12u);
  EXPECT_THROW(read_file(dir / "missing.txt"), IoError);
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Random, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Random, UniformIndexCoversRange) {
  Rng rng(7);
  std::vector<int> hits(6, 0);
  for (int i = 0; i < 6000; ++i) ++hits[rng.uniform_index(6)];
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Random, NormalMoments) {
  Rng rng(9);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Random, SampleWithoutReplacementIsDistinct) {
  Rng rng(3);
  const auto pick = rng.sample_without_replacement(20, 20);
  EXPECT_EQ(std::set<std::size_t>(pick.begin(), pick.end()).size(), 20u);
  EXPECT_TRUE(Rng(3).sample_without_replacement(20, 0).empty());
}

TEST(Random, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(5, s));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(stable_hash("S01"), stable_hash("S01"));
  EXPECT_NE(stable_hash("S01"), stable_hash("S02"));
}

}  // namespace
}  // namespace textpos
