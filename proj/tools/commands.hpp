/*
 * Copyright 2026 The adlab Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ADLAB_TOOLS_COMMANDS_HPP_
#define ADLAB_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace adlab::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Everything a run needs. Unset optionals fall back to per-command defaults.
// Serialized next to every run's outputs as manifest.json.
struct RunManifest {
  std::string command;
  std::optional<std::string> dataset;  // directory with spec.json, train.jsonl, test.jsonl
  std::string provider = "replay";     // live | replay | record
  std::optional<std::string> replay_store;
  std::optional<std::string> model;
  std::string setting = "normal-only";
  std::int64_t seed = 42;
  std::optional<std::string> out;
  std::optional<double> temperature;
  int max_in_flight = 4;
  std::optional<std::string> descriptions;
  std::optional<std::size_t> subsample;
  // augment
  std::size_t v = 10;
  std::size_t t = 50;
  int rounds = 4;
  bool descriptions_only = false;
  bool with_descriptions = false;
  // baselines
  std::vector<std::string> detectors = {"AE", "ECOD", "IForest", "LOF"};
  std::string embeddings = "fixture";  // fixture | live | import
  std::optional<std::string> embeddings_path;
  std::string embedding_model = "text-embedding-3-large";
  std::optional<std::string> synth;
  // select
  std::size_t n_queries = 5;
  bool no_context = false;
  std::optional<std::string> abstracts;
  std::string prompt_template_version = "1";
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

// Runs the adlab command line (args[0] is the program name). Diagnostics go
// to err; short progress notes to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adlab::cli

#endif  // ADLAB_TOOLS_COMMANDS_HPP_
