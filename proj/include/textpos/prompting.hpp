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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textpos/scale.hpp"

namespace textpos {

enum class NaPolicy { kNaAllowed, kNaForbidden };

std::string_view to_string(NaPolicy policy);
NaPolicy parse_na_policy(std::string_view s);

// Instruction text placed around the text to be scaled, plus the scale the
// instructions describe.
struct PromptPreset {
  std::string preset_id;
  std::string pre_text;
  std::string post_text;
  Scale scale;
  NaPolicy na_policy = NaPolicy::kNaAllowed;
  std::string description;

  // SHA-256 over the pre and post texts, for run manifests.
  std::string digest() const;
};

// One chat message with role "user".
struct RenderedMessage {
  std::string role = "user";
  std::string content;
  std::string preset_id;
  std::vector<std::string> unit_ids;
  // The text slotted between pre_text and post_text. Not part of any request
  // digest; the mock backend matches keywords against it.
  std::string text;
};

// Separator placed before every tweet when a tweet set is scaled in one prompt.
inline constexpr std::string_view kTweetSeparator = "\n<TWEET>";

// Ids of the built-in presets, sorted.
std::vector<std::string> preset_catalog();

// Built-in preset. Throws ConfigError for an unknown id.
const PromptPreset& get_preset(std::string_view preset_id);

// Reads a preset directory holding pre.txt, post.txt and preset.json (scale,
// na_policy, description). File contents are used byte-for-byte.
PromptPreset load_preset_dir(const std::filesystem::path& dir);

// Built-in id, or a path to a preset directory.
PromptPreset resolve_preset(std::string_view id_or_path);

// content = pre_text + "\n" + text + "\n" + post_text, nothing else.
RenderedMessage render_prompt(const PromptPreset& preset, std::string_view text,
                              std::string_view unit_id = {});

// Puts every text behind the separator and a space, one block per line:
// "\n<TWEET> a\n\n<TWEET> b\n" for ["a", "b"]. The block list is then
// rendered like a single text, so the prompt reads
//   pre_text, blank line, "<TWEET> a", blank line, "<TWEET> b", blank line, post_text.
RenderedMessage render_concatenated(const PromptPreset& preset,
                                    std::span<const std::string> texts,
                                    std::string_view separator = kTweetSeparator,
                                    std::span<const std::string> unit_ids = {});

// The block list render_concatenated slots into the prompt.
std::string join_texts(std::span<const std::string> texts, std::string_view separator);

}  // namespace textpos
