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

#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "textpos/backend.hpp"

namespace textpos {

enum class MockMode { kScripted, kKeywordRule };

// What a scripted mock does with a content digest it has no entry for.
enum class UnmappedPolicy { kError, kNa };

// Deterministic offline backend.
//  - scripted: content digest (content_digest of the message) -> body.
//  - keyword_rule: keyword -> score. The keyword found earliest in the unit
//    text (case-insensitive; longer keyword on ties) decides the reply
//    '{"Score": <score>}'. No match replies '{"Score": "NA"}'.
class MockBackend : public Backend {
 public:
  MockBackend(MockMode mode, std::map<std::string, std::string> table,
              UnmappedPolicy unmapped = UnmappedPolicy::kNa, BackendOptions options = {});

  std::string name() const override { return "mock"; }
  bool supports_json_mode() const override { return true; }

  // Queues replies returned, in order, before the normal behaviour resumes.
  // Used to exercise retries.
  void inject(std::vector<BackendReply> replies);

 protected:
  BackendReply send(const BackendRequest& request) override;

 private:
  MockMode mode_;
  std::map<std::string, std::string> table_;
  UnmappedPolicy unmapped_;
  std::deque<BackendReply> injected_;
  std::mutex mu_;
};

// Mock options: no rate limit and no real sleeping.
BackendOptions mock_backend_options();

BackendHandle make_mock_backend(MockMode mode, std::map<std::string, std::string> table,
                                UnmappedPolicy unmapped = UnmappedPolicy::kNa);

// Reply body in the shape models are asked to produce.
std::string score_body(double score);
std::string na_body();

}  // namespace textpos
