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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "textpos/cli.hpp"
#include "textpos/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Position political texts by asking language models and averaging the answers."};
  app.set_version_flag("--version", std::string(textpos::kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out, preset, model, backend, cache, corpus;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  std::vector<std::string> sets;
  bool print_config = false;

  app.add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("-o,--out", out, "output directory (output_dir)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--preset", preset, "preset id or preset directory");
  app.add_option("--model", model, "model id (model.id)");
  app.add_option("--backend", backend, "mock, openai, mistral or openai_legacy (model.backend)");
  app.add_option("--cache", cache, "response cache file (cache.path)");
  app.add_option("--corpus", corpus, "corpus file (corpus.path)");
  app.add_option("--parallelism", parallelism, "concurrent requests (model.parallelism)");
  app.add_option("--set", sets, "override any config key: key.path=value")->take_all();
  app.add_flag("--print-config", print_config, "print the resolved config and exit");

  app.fallthrough();
  const std::pair<const char*, const char*> commands[] = {
      {"ingest", "load, segment and sample a corpus into normalized JSON lines"},
      {"scale", "score every unit with a preset and average per target"},
      {"scale-single-prompt", "score each target's texts in one request"},
      {"typicality", "position units by Republican minus Democratic typicality"},
      {"baseline", "fit the naive Bayes baseline and position the prediction corpus"},
      {"eval", "correlate estimates with a benchmark, optionally with ENO and reliability"},
      {"eno", "equivalent number of human ratings for a set of estimates"},
      {"report", "summarize a metrics report as text"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? textpos::kExitOk : textpos::kExitUsage;
  }

  std::vector<textpos::ConfigOverride> overrides;
  auto add = [&](const char* key, const std::optional<std::string>& v) {
    if (v) overrides.emplace_back(key, *v);
  };
  add("output_dir", out);
  add("preset", preset);
  add("model.id", model);
  add("model.backend", backend);
  add("cache.path", cache);
  add("corpus.path", corpus);
  if (seed) overrides.emplace_back("seed", std::to_string(*seed));
  if (parallelism) overrides.emplace_back("model.parallelism", std::to_string(*parallelism));
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "--set expects key=value, got '" << s << "'\n";
      return textpos::kExitUsage;
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }

  nlohmann::ordered_json config;
  try {
    const auto file = config_path.empty() ? nlohmann::ordered_json::object()
                                          : textpos::load_config_file(config_path);
    config = textpos::resolve_config(file, overrides);
  } catch (const textpos::Error& e) {
    std::cerr << "textpos: " << e.what() << "\n";
    return textpos::kExitUsage;
  }
  if (print_config) {
    std::cout << config.dump(2) << "\n";
    return textpos::kExitOk;
  }
  return textpos::run_command(app.get_subcommands().front()->get_name(), config, std::cerr);
}
