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
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace textpos {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Exit statuses of every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

// Every key a run config may hold, with its default. Keys outside this tree
// are rejected, except inside the free-form maps listed in the README.
nlohmann::ordered_json default_config();

nlohmann::ordered_json load_config_file(const std::filesystem::path& path);

// "a.b.c" -> value. The raw value is read as JSON when it parses and the
// target key is not a string; otherwise it is taken as a string.
using ConfigOverride = std::pair<std::string, std::string>;

// defaults <- file <- overrides, then type-checked. Throws ConfigError.
nlohmann::ordered_json resolve_config(const nlohmann::ordered_json& file_config,
                                      const std::vector<ConfigOverride>& overrides = {});

// Command entry points. Each takes a resolved config, writes its outputs plus
// <command>.config.json (the resolved config) and <command>.manifest.json
// under config["output_dir"], logs to `log`, and returns an exit status.
int cmd_ingest(const nlohmann::ordered_json& config, std::ostream& log);
int cmd_scale(const nlohmann::ordered_json& config, std::ostream& log);
int cmd_scale_single_prompt(const nlohmann::ordered_json& config, std::ostream& log);
int cmd_typicality(const nlohmann::ordered_json& config, std::ostream& log);
int cmd_baseline(const nlohmann::ordered_json& config, std::ostream& log);
int cmd_eval(const nlohmann::ordered_json& config, std::ostream& log);
int cmd_eno(const nlohmann::ordered_json& config, std::ostream& log);
int cmd_report(const nlohmann::ordered_json& config, std::ostream& log);

const std::vector<std::string>& command_names();

// Dispatches by subcommand name; unknown names are a usage error.
int run_command(std::string_view name, const nlohmann::ordered_json& config, std::ostream& log);

}  // namespace textpos
