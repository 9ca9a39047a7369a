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

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace textpos {

enum class Party { kDemocratic = 0, kRepublican = 1 };

inline constexpr std::size_t kPartyCount = 2;

struct LabeledText {
  std::string id;
  std::string text;
  Party label = Party::kDemocratic;
};

// Lowercases ASCII, splits on anything that is not an ASCII letter or digit
// (bytes >= 0x80 are kept so UTF-8 words survive), drops tokens shorter than
// two bytes.
std::vector<std::string> tokenize(std::string_view text);

struct ClassPosteriors {
  double democratic = 0.0;
  double republican = 0.0;
};

// Multinomial naive Bayes over raw token counts with add-one smoothing,
// restricted to the vocab_size most frequent training tokens.
class NaiveBayesModel {
 public:
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  std::size_t vocab_size_limit() const { return vocab_size_limit_; }
  double log_prior(Party c) const { return log_priors_[index(c)]; }
  // log P(token | class) for vocabulary entry `token_id`.
  double log_likelihood(Party c, std::size_t token_id) const {
    return log_likelihoods_[index(c)][token_id];
  }
  // Vocabulary id of a token, or -1.
  long token_id(std::string_view token) const;

  // Posterior class probabilities; out-of-vocabulary tokens are ignored, so a
  // text without known tokens gets the priors.
  ClassPosteriors posteriors(std::string_view text) const;

  // P(Republican | text) - P(Democratic | text), in [-1, 1].
  double position(std::string_view text) const;

  nlohmann::json to_json() const;
  static NaiveBayesModel from_json(const nlohmann::json& j);

  friend NaiveBayesModel fit_naive_bayes(std::span<const LabeledText> train,
                                         std::size_t vocab_size);

 private:
  static std::size_t index(Party c) { return static_cast<std::size_t>(c); }

  std::vector<std::string> vocabulary_;  // sorted; position is the token id
  std::map<std::string, std::size_t, std::less<>> ids_;
  std::size_t vocab_size_limit_ = 0;
  std::array<double, kPartyCount> log_priors_{};
  std::array<std::vector<double>, kPartyCount> log_likelihoods_;
  std::array<std::size_t, kPartyCount> documents_{};
};

// Vocabulary: the vocab_size most frequent tokens over the whole training set,
// ties broken lexicographically. Priors are class document shares.
// Throws DataError if a class has no document, ConfigError if vocab_size == 0.
NaiveBayesModel fit_naive_bayes(std::span<const LabeledText> train, std::size_t vocab_size);

inline ClassPosteriors nb_posteriors(const NaiveBayesModel& m, std::string_view text) {
  return m.posteriors(text);
}
inline double nb_position(const NaiveBayesModel& m, std::string_view text) {
  return m.position(text);
}

}  // namespace textpos
