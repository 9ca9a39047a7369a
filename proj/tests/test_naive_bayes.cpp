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

#include <cmath>
#include <map>
#include <random>

#include "textpos/errors.hpp"
#include "textpos/naive_bayes.hpp"

namespace textpos {
namespace {

std::vector<LabeledText> toy() {
  return {{"r1", "tax tax cut", Party::kRepublican}, {"d1", "health care", Party::kDemocratic}};
}

// Plain-product Bayes rule over counts, no logs. Valid for short texts.
double brute_force_p_rep(const std::vector<LabeledText>& train, const std::vector<std::string>& vocab,
                         const std::string& text) {
  std::map<std::string, double> count[2];
  double in_vocab_total[2] = {0, 0};
  double docs[2] = {0, 0};
  for (const auto& d : train) {
    const int c = d.label == Party::kRepublican ? 1 : 0;
    docs[c] += 1;
    for (const auto& t : tokenize(d.text)) {
      if (std::find(vocab.begin(), vocab.end(), t) == vocab.end()) continue;
      count[c][t] += 1;
      in_vocab_total[c] += 1;
    }
  }
  double joint[2];
  for (int c = 0; c < 2; ++c) {
    joint[c] = docs[c] / (docs[0] + docs[1]);
    for (const auto& t : tokenize(text)) {
      if (std::find(vocab.begin(), vocab.end(), t) == vocab.end()) continue;
      joint[c] *= (count[c][t] + 1.0) / (in_vocab_total[c] + static_cast<double>(vocab.size()));
    }
  }
  return joint[1] / (joint[0] + joint[1]);
}

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("Tax-CUT, a #MAGA 2024!"), (std::vector<std::string>{"tax", "cut", "maga", "2024"}));
  EXPECT_EQ(tokenize("Fête"), (std::vector<std::string>{"f\xc3\xaate"}));
  EXPECT_TRUE(tokenize("").empty());
}

TEST(FitNaiveBayes, ToyClosedForm) {
  const auto m = fit_naive_bayes(toy(), 10);
  EXPECT_EQ(m.vocabulary(), (std::vector<std::string>{"care", "cut", "health", "tax"}));
  const auto tax = static_cast<std::size_t>(m.token_id("tax"));
  EXPECT_DOUBLE_EQ(std::exp(m.log_likelihood(Party::kRepublican, tax)), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(std::exp(m.log_likelihood(Party::kDemocratic, tax)), 1.0 / 6.0);
  EXPECT_EQ(m.log_prior(Party::kRepublican), m.log_prior(Party::kDemocratic));
  EXPECT_EQ(m.token_id("nothing"), -1);
}

TEST(FitNaiveBayes, LikelihoodsNormalized) {
  const std::vector<LabeledText> train = {{"1", "a1 b1 b1 c1 word", Party::kRepublican},
                                          {"2", "word word other", Party::kDemocratic},
                                          {"3", "c1 c1 other thing", Party::kDemocratic}};
  for (std::size_t k : {1u, 2u, 3u, 100u}) {
    const auto m = fit_naive_bayes(train, k);
    EXPECT_LE(m.vocabulary().size(), k);
    for (Party c : {Party::kDemocratic, Party::kRepublican}) {
      double total = 0;
      for (std::size_t i = 0; i < m.vocabulary().size(); ++i) total += std::exp(m.log_likelihood(c, i));
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
  EXPECT_NEAR(std::exp(fit_naive_bayes(train, 5).log_prior(Party::kDemocratic)), 2.0 / 3.0, 1e-15);
}

TEST(FitNaiveBayes, VocabSizeOneAndTies) {
  EXPECT_EQ(fit_naive_bayes(toy(), 1).vocabulary(), (std::vector<std::string>{"tax"}));
  // cut, care and health all occur once; lexicographic order breaks the tie.
  EXPECT_EQ(fit_naive_bayes(toy(), 2).vocabulary(), (std::vector<std::string>{"care", "tax"}));
}

TEST(FitNaiveBayes, Errors) {
  EXPECT_THROW(fit_naive_bayes(toy(), 0), ConfigError);
  const std::vector<LabeledText> one_class = {{"1", "tax", Party::kRepublican}};
  EXPECT_THROW(fit_naive_bayes(one_class, 5), DataError);
}

TEST(Posteriors, ToyAgainstBruteForce) {
  const auto train = toy();
  const auto m = fit_naive_bayes(train, 10);
  const auto p = m.posteriors("tax");
  EXPECT_NEAR(p.republican, (3.0 / 7.0) / (3.0 / 7.0 + 1.0 / 6.0), 1e-12);
  EXPECT_NEAR(p.republican, brute_force_p_rep(train, m.vocabulary(), "tax"), 1e-12);
  EXPECT_NEAR(m.position("tax"), p.republican - p.democratic, 1e-15);
}

TEST(Posteriors, EmptyAndOutOfVocabularyGivePriors) {
  const std::vector<LabeledText> train = {{"1", "tax", Party::kRepublican},
                                          {"2", "care", Party::kDemocratic},
                                          {"3", "health", Party::kDemocratic}};
  const auto m = fit_naive_bayes(train, 10);
  for (const char* text : {"", "zebra unicorn", "!!"}) {
    const auto p = m.posteriors(text);
    EXPECT_NEAR(p.democratic, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(p.republican, 1.0 / 3.0, 1e-12);
  }
}

TEST(Posteriors, SymmetricModelSharedTokens) {
  const std::vector<LabeledText> train = {{"1", "alpha shared", Party::kRepublican},
                                          {"2", "beta shared", Party::kDemocratic}};
  const auto m = fit_naive_bayes(train, 10);
  EXPECT_NEAR(m.posteriors("shared shared").republican, 0.5, 1e-15);
  EXPECT_NEAR(m.position("shared"), 0.0, 1e-15);
}

std::string random_text(std::mt19937_64& gen, const std::vector<std::string>& words, int max_len) {
  std::string s;
  const int n = static_cast<int>(gen() % static_cast<unsigned>(max_len + 1));
  for (int i = 0; i < n; ++i) s += words[gen() % words.size()] + " ";
  return s;
}

TEST(Posteriors, RandomAgreementWithBruteForce) {
  const std::vector<std::string> words = {"tax", "care", "gun", "vote", "farm", "oov"};
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LabeledText> train;
    for (int d = 0; d < 6; ++d) {
      train.push_back({std::to_string(d), random_text(gen, words, 6) + "x" + std::to_string(d % 2) + "x",
                       d % 2 ? Party::kRepublican : Party::kDemocratic});
    }
    const auto m = fit_naive_bayes(train, 5);
    for (int t = 0; t < 5; ++t) {
      const auto text = random_text(gen, words, 8);
      const auto p = m.posteriors(text);
      EXPECT_NEAR(p.republican, brute_force_p_rep(train, m.vocabulary(), text), 1e-12);
      EXPECT_NEAR(p.republican + p.democratic, 1.0, 1e-12);
    }
  }
}

TEST(Position, LabelSwapAntisymmetry) {
  std::vector<LabeledText> train = {{"1", "tax cut tax border", Party::kRepublican},
                                    {"2", "care health vote", Party::kDemocratic},
                                    {"3", "border gun tax", Party::kRepublican},
                                    {"4", "health climate", Party::kDemocratic},
                                    {"5", "climate vote care", Party::kDemocratic}};
  auto swapped = train;
  for (auto& d : swapped) {
    d.label = d.label == Party::kRepublican ? Party::kDemocratic : Party::kRepublican;
  }
  const auto m = fit_naive_bayes(train, 100);
  const auto s = fit_naive_bayes(swapped, 100);
  for (const char* text : {"tax", "health care", "border climate gun", "", "unknown words"}) {
    EXPECT_NEAR(m.position(text), -s.position(text), 1e-12) << text;
  }
}

TEST(Serialization, JsonRoundTrip) {
  const auto m = fit_naive_bayes(toy(), 3);
  const auto j = m.to_json();
  EXPECT_EQ(j.at("format"), "textpos.naive_bayes.v1");
  const auto back = NaiveBayesModel::from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.vocabulary(), m.vocabulary());
  EXPECT_EQ(back.vocab_size_limit(), 3u);
  for (const char* text : {"tax", "care cut", ""}) {
    EXPECT_DOUBLE_EQ(back.position(text), m.position(text));
  }
  auto broken = j;
  broken.erase("vocabulary");
  EXPECT_THROW(NaiveBayesModel::from_json(broken), DataError);
}

}  // namespace
}  // namespace textpos
