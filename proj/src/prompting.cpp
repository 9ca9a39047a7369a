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

#include "textpos/prompting.hpp"

#include <map>

#include "json.hpp"
#include "textpos/delimited.hpp"
#include "textpos/digest.hpp"
#include "textpos/errors.hpp"
#include "textpos/internal/embedded_presets.hpp"

namespace textpos {
namespace {

PromptPreset from_parts(std::string_view id, std::string pre, std::string post,
                        std::string_view metadata_json) {
  auto meta = nlohmann::json::parse(metadata_json, nullptr, false);
  if (meta.is_discarded() || !meta.is_object()) {
    throw ConfigError("preset " + std::string(id) + ": preset.json is not a JSON object");
  }
  PromptPreset p;
  p.preset_id = meta.value("id", std::string(id));
  p.pre_text = std::move(pre);
  p.post_text = std::move(post);
  p.description = meta.value("description", "");
  p.na_policy = parse_na_policy(meta.value("na_policy", "na_allowed"));
  if (meta.contains("scale")) {
    const auto& s = meta["scale"];
    p.scale.min = s.value("min", 0.0);
    p.scale.max = s.value("max", 100.0);
    p.scale.min_label = s.value("min_label", "");
    p.scale.max_label = s.value("max_label", "");
    p.scale.dimension_name = s.value("dimension_name", "");
  }
  p.scale.validate();
  return p;
}

const std::map<std::string, PromptPreset, std::less<>>& catalog() {
  static const auto kCatalog = [] {
    std::map<std::string, PromptPreset, std::less<>> m;
    for (const auto& e : internal::embedded_presets()) {
      m.emplace(std::string(e.id), from_parts(e.id, std::string(e.pre_text),
                                               std::string(e.post_text), e.metadata_json));
    }
    return m;
  }();
  return kCatalog;
}

}  // namespace

std::string_view to_string(NaPolicy policy) {
  return policy == NaPolicy::kNaAllowed ? "na_allowed" : "na_forbidden";
}

NaPolicy parse_na_policy(std::string_view s) {
  if (s == "na_allowed") return NaPolicy::kNaAllowed;
  if (s == "na_forbidden") return NaPolicy::kNaForbidden;
  throw ConfigError("unknown na_policy '" + std::string(s) + "'");
}

std::string PromptPreset::digest() const {
  std::string material = pre_text;
  material += '\0';
  material += post_text;
  return sha256_hex(material);
}

std::vector<std::string> preset_catalog() {
  std::vector<std::string> ids;
  for (const auto& [id, p] : catalog()) ids.push_back(id);
  return ids;
}

const PromptPreset& get_preset(std::string_view preset_id) {
  auto it = catalog().find(preset_id);
  if (it == catalog().end()) {
    std::string known;
    for (const auto& [id, p] : catalog()) known += (known.empty() ? "" : ", ") + id;
    throw ConfigError("unknown preset '" + std::string(preset_id) + "' (known: " + known + ")");
  }
  return it->second;
}

PromptPreset load_preset_dir(const std::filesystem::path& dir) {
  const auto id = dir.filename().string();
  std::string meta = "{}";
  if (std::filesystem::exists(dir / "preset.json")) meta = read_file(dir / "preset.json");
  return from_parts(id, read_file(dir / "pre.txt"), read_file(dir / "post.txt"), meta);
}

PromptPreset resolve_preset(std::string_view id_or_path) {
  if (catalog().contains(id_or_path)) return get_preset(id_or_path);
  const std::filesystem::path dir(id_or_path);
  if (std::filesystem::is_directory(dir)) return load_preset_dir(dir);
  return get_preset(id_or_path);  // raises with the list of known ids
}

RenderedMessage render_prompt(const PromptPreset& preset, std::string_view text,
                              std::string_view unit_id) {
  RenderedMessage m;
  m.content.reserve(preset.pre_text.size() + text.size() + preset.post_text.size() + 2);
  m.content.append(preset.pre_text).append("\n").append(text).append("\n").append(
      preset.post_text);
  m.preset_id = preset.preset_id;
  if (!unit_id.empty()) m.unit_ids.emplace_back(unit_id);
  m.text = std::string(text);
  return m;
}

std::string join_texts(std::span<const std::string> texts, std::string_view separator) {
  std::string inner;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i > 0) inner += '\n';
    inner.append(separator).append(" ").append(texts[i]);
  }
  inner += '\n';
  return inner;
}

RenderedMessage render_concatenated(const PromptPreset& preset,
                                    std::span<const std::string> texts,
                                    std::string_view separator,
                                    std::span<const std::string> unit_ids) {
  if (texts.empty()) throw ConfigError("render_concatenated needs at least one text");
  RenderedMessage m = render_prompt(preset, join_texts(texts, separator));
  m.unit_ids.assign(unit_ids.begin(), unit_ids.end());
  return m;
}

}  // namespace textpos
