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

#ifndef ADLAB_ZEROSHOT_HPP_
#define ADLAB_ZEROSHOT_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adlab/corpus.hpp"
#include "adlab/eval.hpp"
#include "adlab/llm.hpp"

namespace adlab {

enum class DetectionSetting { kNormalOnly, kNormalPlusAnomaly };

// "normal-only" / "normal-anomaly".
const char* to_string(DetectionSetting s);
DetectionSetting parse_detection_setting(const std::string& s);

struct CategoryEntry {
  std::string name;
  std::optional<std::string> description;

  friend bool operator==(const CategoryEntry&, const CategoryEntry&) = default;
};

struct PromptContext {
  std::vector<CategoryEntry> normal;
  std::optional<CategoryEntry> anomaly;

  // Category names from the spec; the anomaly entry only for
  // kNormalPlusAnomaly (which needs spec.anomaly_known).
  static PromptContext from_spec(const DatasetSpec& spec, DetectionSetting setting);

  friend bool operator==(const PromptContext&, const PromptContext&) = default;
};

// Throws InvalidArgument when ctx does not fit the setting or holds an empty
// name or description.
void validate_context(const PromptContext& ctx, DetectionSetting setting);

// Instantiates the detection template for one sample.
std::string build_detection_prompt(const Sample& sample, const PromptContext& ctx,
                                   DetectionSetting setting);

struct DetectionAnswer {
  std::string reason;
  double anomaly_score = 0.0;
};

// Throws LlmError: kRepetitionLoop for looping text, kMalformedOutput when no
// JSON object with both keys is found, kFormatViolation when the score is
// not a number in [0, 1].
DetectionAnswer parse_detection_response(const std::string& text);

struct DetectionRecord {
  std::string sample_id;
  int label = kNormal;
  std::string reason;
  double anomaly_score = 0.0;
  std::optional<LlmFailure> failure;

  bool ok() const { return !failure.has_value(); }
  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

using ErrorCounts = std::array<std::size_t, kFailureKindCount>;

struct ZeroShotConfig {
  std::string model_id;
  double temperature = 0.0;
  std::optional<std::int64_t> seed = 42;
  int max_tokens = kDetectionMaxTokens;
  int max_in_flight = 4;
  // Attempts per sample when the provider raises a transport failure.
  // Live runs use 1; LiveChatProvider has its own retry loop.
  int transport_attempts = 3;
  RepetitionConfig repetition;
  std::vector<std::string> refusal_phrases = default_refusal_phrases();
  // Records are appended here as they complete; existing records are reused.
  std::optional<std::filesystem::path> journal;
};

struct ZeroShotResult {
  // One per test sample, in test order.
  std::vector<DetectionRecord> records;
  ErrorCounts error_counts{};
  // Samples answered from the journal instead of the provider.
  std::size_t resumed = 0;

  // Scores and labels of the records without a failure.
  LabeledScores scored() const;
  std::size_t failures() const;
};

// Maps a provider outcome to a record, classifying failures.
DetectionRecord classify_detection_outcome(const Sample& sample, const ChatOutcome& outcome,
                                           const ZeroShotConfig& config);

// Runs the detector over dataset.test. Replay misses and journal I/O errors
// propagate; everything else becomes a per-sample failure.
ZeroShotResult run_zero_shot(const Dataset& dataset, const PromptContext& ctx,
                             DetectionSetting setting, ChatProvider& provider,
                             const ZeroShotConfig& config);

}  // namespace adlab

#endif  // ADLAB_ZEROSHOT_HPP_
