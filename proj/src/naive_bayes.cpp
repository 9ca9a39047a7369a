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

#include "textpos/naive_bayes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "textpos/errors.hpp"

namespace textpos {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) && c < 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (c >= 0x80) {
      current.push_back(ch);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

long NaiveBayesModel::token_id(std::string_view token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? -1 : static_cast<long>(it->second);
}

ClassPosteriors NaiveBayesModel::posteriors(std::string_view text) const {
  std::array<double, kPartyCount> log_joint = log_priors_;
  for (const auto& tok : tokenize(text)) {
    auto it = ids_.find(tok);
    if (it == ids_.end()) continue;
    for (std::size_t c = 0; c < kPartyCount; ++c) log_joint[c] += log_likelihoods_[c][it->second];
  }
  const double top = std::max(log_joint[0], log_joint[1]);
  const double e0 = std::exp(log_joint[0] - top);
  const double e1 = std::exp(log_joint[1] - top);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double NaiveBayesModel::position(std::string_view text) const {
  const auto p = posteriors(text);
  return p.republican - p.democratic;
}

NaiveBayesModel fit_naive_bayes(std::span<const LabeledText> train, std::size_t vocab_size) {
  if (vocab_size == 0) throw ConfigError("vocab_size must be at least 1");

  std::array<std::size_t, kPartyCount> documents{};
  std::map<std::string, std::size_t> total;
  std::array<std::map<std::string, std::size_t>, kPartyCount> per_class;
  for (const auto& doc : train) {
    const auto c = static_cast<std::size_t>(doc.label);
    ++documents[c];
    for (auto& tok : tokenize(doc.text)) {
      ++per_class[c][tok];
      ++total[tok];
    }
  }
  if (documents[0] == 0) throw DataError("no training document for the Democratic class");
  if (documents[1] == 0) throw DataError("no training document for the Republican class");

  std::vector<std::pair<std::string, std::size_t>> ranked(total.begin(), total.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > vocab_size) ranked.resize(vocab_size);

  NaiveBayesModel m;
  m.vocab_size_limit_ = vocab_size;
  for (auto& [tok, n] : ranked) m.vocabulary_.push_back(tok);
  std::sort(m.vocabulary_.begin(), m.vocabulary_.end());
  for (std::size_t i = 0; i < m.vocabulary_.size(); ++i) m.ids_.emplace(m.vocabulary_[i], i);

  const double n_docs = static_cast<double>(documents[0] + documents[1]);
  const double v = static_cast<double>(m.vocabulary_.size());
  for (std::size_t c = 0; c < kPartyCount; ++c) {
    m.documents_[c] = documents[c];
    m.log_priors_[c] = std::log(static_cast<double>(documents[c]) / n_docs);
    std::size_t in_vocab = 0;
    for (const auto& tok : m.vocabulary_) {
      auto it = per_class[c].find(tok);
      if (it != per_class[c].end()) in_vocab += it->second;
    }
    const double denom = static_cast<double>(in_vocab) + v;
    auto& ll = m.log_likelihoods_[c];
    ll.resize(m.vocabulary_.size());
    for (std::size_t i = 0; i < m.vocabulary_.size(); ++i) {
      auto it = per_class[c].find(m.vocabulary_[i]);
      const double count = it == per_class[c].end() ? 0.0 : static_cast<double>(it->second);
      ll[i] = std::log((count + 1.0) / denom);
    }
  }
  return m;
}

nlohmann::json NaiveBayesModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "textpos.naive_bayes.v1";
  j["config"] = {{"vocab_size", vocab_size_limit_},
                 {"smoothing", "add-one"},
                 {"tokenizer", "lowercase-ascii-alnum-min2"}};
  j["classes"] = {"DEM", "REP"};
  j["documents"] = {{"DEM", documents_[0]}, {"REP", documents_[1]}};
  j["log_priors"] = {{"DEM", log_priors_[0]}, {"REP", log_priors_[1]}};
  j["vocabulary"] = vocabulary_;
  j["log_likelihoods"] = {{"DEM", log_likelihoods_[0]}, {"REP", log_likelihoods_[1]}};
  return nlohmann::json::parse(j.dump());
}

NaiveBayesModel NaiveBayesModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "textpos.naive_bayes.v1") {
      throw DataError("unsupported model format");
    }
    NaiveBayesModel m;
    m.vocab_size_limit_ = j.at("config").at("vocab_size").get<std::size_t>();
    m.vocabulary_ = j.at("vocabulary").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < m.vocabulary_.size(); ++i) m.ids_.emplace(m.vocabulary_[i], i);
    const char* names[kPartyCount] = {"DEM", "REP"};
    for (std::size_t c = 0; c < kPartyCount; ++c) {
      m.documents_[c] = j.at("documents").at(names[c]).get<std::size_t>();
      m.log_priors_[c] = j.at("log_priors").at(names[c]).get<double>();
      m.log_likelihoods_[c] = j.at("log_likelihoods").at(names[c]).get<std::vector<double>>();
      if (m.log_likelihoods_[c].size() != m.vocabulary_.size()) {
        throw DataError("likelihood table size does not match vocabulary");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad naive Bayes model: ") + e.what());
  }
}

}  // namespace textpos
