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

#ifndef ADLAB_AUGMENT_HPP_
#define ADLAB_AUGMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adlab/corpus.hpp"
#include "adlab/llm.hpp"
#include "adlab/zeroshot.hpp"

namespace adlab {

struct KeywordGroup {
  std::string broad;
  std::string intermediate;
  std::string fine;
  std::string category;

  friend bool operator==(const KeywordGroup&, const KeywordGroup&) = default;
};

struct SynthSample {
  std::string id;  // "synth:{round}:{category}:{index}"
  std::string category;
  KeywordGroup keywords;
  std::string text;
  int round_index = 0;
  std::string prompt_hash;  // request_key of the sample inquiry

  friend bool operator==(const SynthSample&, const SynthSample&) = default;
};

struct RoundConfig {
  double temperature = 1.0;
  std::int64_t seed = 42;
  std::string suffix;

  friend bool operator==(const RoundConfig&, const RoundConfig&) = default;
};

// Temperatures 1.0, 0.9, 0.8, 0.7; seeds 42..45; the four encouragement
// suffixes in order. `rounds` may be 1..4.
std::vector<RoundConfig> default_round_schedule(int rounds = 4);

// Keyword-generation template for all normal categories; a non-empty suffix
// becomes the final line.
std::string build_keyword_prompt(const DatasetSpec& spec, std::size_t t,
                                 const std::string& suffix = "");

enum class KeywordParseMode {
  // Every category must have exactly t groups.
  kStrict,
  // Fewer than t groups is accepted (and reported as a shortfall).
  kLenient,
};

struct KeywordParseResult {
  std::vector<KeywordGroup> groups;  // category order, then response order
  // Category -> groups missing relative to t (lenient mode only).
  std::map<std::string, std::size_t> shortfall;
};

// Throws LlmError(kMalformedOutput) when no JSON object is present and
// DataError for a missing category, wrong group count or a group that is not
// exactly three non-empty strings (naming category and index).
KeywordParseResult parse_keyword_groups(const std::string& text, const DatasetSpec& spec,
                                        std::size_t t,
                                        KeywordParseMode mode = KeywordParseMode::kStrict);

// Keeps the first of each (folded broad, intermediate, fine, category).
std::vector<KeywordGroup> dedup_keyword_groups(const std::vector<KeywordGroup>& groups);

std::string build_sample_prompt(const KeywordGroup& group, const DatasetSpec& spec);

// Unwraps a sample response: a bare JSON string literal or an object with a
// single string value is decoded; anything else is taken verbatim (trimmed).
std::string parse_sample_response(const std::string& text);

struct SynthRunConfig {
  std::string model_id;
  int keyword_max_tokens = kKeywordMaxTokens;
  int sample_max_tokens = kDetectionMaxTokens;
  int max_in_flight = 4;
  KeywordParseMode parse_mode = KeywordParseMode::kLenient;
  // Receives shortfall and progress notes.
  std::function<void(const std::string&)> log;
  // Completed samples are journaled here and reused on resume.
  std::optional<std::filesystem::path> journal;
};

struct RoundReport {
  int round_index = 0;
  double temperature = 0.0;
  std::int64_t seed = 0;
  std::size_t parsed_groups = 0;
  std::size_t duplicates_removed = 0;
  std::size_t samples = 0;
};

struct SynthRunResult {
  std::vector<SynthSample> samples;
  std::vector<RoundReport> rounds;
};

// One keyword inquiry per round, then one sample inquiry per group that
// survives cross-round dedup. t = 0 issues no inquiries at all.
SynthRunResult run_synth_rounds(const DatasetSpec& spec, std::size_t t,
                                const std::vector<RoundConfig>& rounds, ChatProvider& provider,
                                const SynthRunConfig& config);

// small_train plus one label-0 sample per synthetic item.
Dataset build_dataset_with_synth(const Dataset& small_train, const std::vector<SynthSample>& synth);

// Writes the synthetic samples as corpus JSONL and a provenance sidecar
// (<path>.provenance.jsonl: id, round, keywords, prompt hash).
void write_synth_samples(const std::filesystem::path& path, const std::vector<SynthSample>& synth);

// ---------------------------------------------------------------------------

// Temperature used for description generation.
inline constexpr double kDescriptionTemperature = 0.5;

struct CategoryDescription {
  std::string category;
  std::string text;

  friend bool operator==(const CategoryDescription&, const CategoryDescription&) = default;
};

// Lists the normal categories, then the anomaly category.
std::string build_description_prompt(const DatasetSpec& spec);

// One description per normal category plus the anomaly category, in spec
// order. Throws DataError for a missing or empty entry and LlmError
// (kMalformedOutput) when no JSON object is found.
std::vector<CategoryDescription> parse_descriptions(const std::string& text,
                                                    const DatasetSpec& spec);

// Reads/writes {"category": "description", ...}.
std::vector<CategoryDescription> read_descriptions_json(const std::filesystem::path& path,
                                                        const DatasetSpec& spec);
void write_descriptions_json(const std::filesystem::path& path,
                             const std::vector<CategoryDescription>& descriptions);

// Attaches descriptions to the normal entries, and to the anomaly entry when
// ctx has one (the NormalPlusAnomaly case). Throws InvalidArgument when a
// needed category has no description.
PromptContext enrich_context(const PromptContext& ctx,
                             const std::vector<CategoryDescription>& descriptions);

}  // namespace adlab

#endif  // ADLAB_AUGMENT_HPP_
