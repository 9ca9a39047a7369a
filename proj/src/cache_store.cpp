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

#include "textpos/cache_store.hpp"

#include <sstream>

#include "textpos/delimited.hpp"

namespace textpos {
namespace {

RawResponse response_from_record(const nlohmann::json& rec) {
  RawResponse r;
  r.request_digest = rec.at("digest").get<std::string>();
  r.body = rec.at("body").get<std::string>();
  r.timestamp = rec.value("timestamp", "");
  r.transport_meta = rec.value("transport_meta", nlohmann::json::object());
  return r;
}

}  // namespace

CacheStore CacheStore::open(const std::filesystem::path& path) {
  CacheStore store;
  store.path_ = path;
  if (std::filesystem::exists(path)) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    const bool ends_with_newline = !content.empty() && content.back() == '\n';
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const bool last = in.peek() == std::char_traits<char>::eof();
      auto rec = nlohmann::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.is_object() || !rec.contains("digest") ||
          !rec.contains("body")) {
        if (last && !ends_with_newline) break;  // interrupted append
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad cache record");
      }
      auto r = response_from_record(rec);
      store.entries_.emplace(r.request_digest, std::move(r));
    }
    if (!content.empty() && !ends_with_newline) {
      // Drop the partial tail so the next append starts on a clean line.
      const auto keep = content.rfind('\n');
      write_file(path, keep == std::string::npos ? std::string_view{}
                                                 : std::string_view(content).substr(0, keep + 1));
    }
  } else if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create cache directory " + path.parent_path().string() + ": " + ec.message());
  }
  store.log_.open(path, std::ios::binary | std::ios::app);
  if (!store.log_) throw IoError("cannot open cache log " + path.string());
  return store;
}

CacheStore::CacheStore(CacheStore&& other) noexcept
    : path_(std::move(other.path_)),
      log_(std::move(other.log_)),
      entries_(std::move(other.entries_)) {}

std::optional<RawResponse> CacheStore::find(const std::string& digest) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool CacheStore::put(const BackendRequest& request, const RawResponse& response) {
  std::lock_guard lock(mu_);
  if (entries_.contains(response.request_digest)) return false;
  RawResponse stored = response;
  {
    nlohmann::ordered_json rec;
    rec["digest"] = response.request_digest;
    rec["model_id"] = request.model_id;
    rec["params"] = {{"temperature", request.params.temperature},
                     {"top_p", request.params.top_p},
                     {"max_tokens", request.params.max_tokens},
                     {"json_mode", request.params.json_mode},
                     {"n", request.params.n}};
    rec["content_hash"] = content_digest(request.message.content);
    rec["body"] = response.body;
    rec["timestamp"] = response.timestamp;
    rec["transport_meta"] = response.transport_meta;
    const std::string line =
        rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    // Invalid UTF-8 in a body is replaced on write; keep memory equal to what
    // a replay of the log will produce.
    stored = response_from_record(nlohmann::json::parse(line));
    if (log_.is_open()) {
      log_.write(line.data(), static_cast<std::streamsize>(line.size()));
      log_.flush();
      if (!log_) throw IoError("write failure on cache log " + path_.string());
    }
  }
  entries_.emplace(response.request_digest, std::move(stored));
  return true;
}

std::size_t CacheStore::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

CachedResponse submit_cached(Backend& backend, const BackendRequest& request, CacheStore& store) {
  const std::string digest = cache_key(request);
  if (auto hit = store.find(digest)) return {std::move(*hit), true};
  RawResponse fresh = backend.submit(request);
  store.put(request, fresh);
  // Another worker may have stored the same digest first; its entry wins.
  return {store.find(digest).value_or(std::move(fresh)), false};
}

}  // namespace textpos
