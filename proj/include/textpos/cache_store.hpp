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
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "textpos/backend.hpp"

namespace textpos {

// Append-only response log. Each line is one JSON record:
//   {"digest", "model_id", "params", "content_hash", "body", "timestamp",
//    "transport_meta"}
// Replaying the log rebuilds the digest -> response map; the first record of a
// digest wins. Message content itself is not stored, only its hash.
class CacheStore {
 public:
  // In-memory store, nothing persisted.
  CacheStore() = default;

  // Opens (creating if needed) a log file and replays it. A truncated final
  // line, as left by an interrupted write, is ignored; any other bad line
  // raises DataError.
  static CacheStore open(const std::filesystem::path& path);

  CacheStore(CacheStore&& other) noexcept;
  CacheStore& operator=(CacheStore&&) = delete;

  std::optional<RawResponse> find(const std::string& digest) const;

  // Records a response. Returns false if the digest was already present (the
  // stored response is kept). Throws IoError if the log cannot be written.
  bool put(const BackendRequest& request, const RawResponse& response);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream log_;
  std::map<std::string, RawResponse> entries_;
  mutable std::mutex mu_;
};

struct CachedResponse {
  RawResponse response;
  bool cache_hit = false;
};

// Looks the request up first; on a miss submits, persists, then returns.
CachedResponse submit_cached(Backend& backend, const BackendRequest& request, CacheStore& store);

}  // namespace textpos
