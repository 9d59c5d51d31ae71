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

#ifndef ADLAB_CORPUS_HPP_
#define ADLAB_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adlab {

// Label values. Training splits contain only kNormal.
inline constexpr int kNormal = 0;
inline constexpr int kAnomaly = 1;

struct Sample {
  std::string id;
  std::string text;
  std::string category;
  int label = kNormal;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Optional sizes a spec file may declare; load_dataset checks them.
struct ExpectedSizes {
  std::optional<std::size_t> train;
  std::optional<std::size_t> test;
  // Percent, e.g. 11.77 for 11.77%.
  std::optional<double> anomaly_percent;
};

struct DatasetSpec {
  std::string name;
  std::string original_task;
  // Order is significant: it drives prompt rendering.
  std::vector<std::string> normal_categories;
  std::string anomaly_category;
  // False when the anomaly category is used for labels but must not be
  // revealed to a detector (only the NormalOnly setting is then valid).
  bool anomaly_known = true;
  ExpectedSizes expected;

  bool is_normal_category(const std::string& c) const;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<Sample> train;
  std::vector<Sample> test;

  // (# label == 1) / |test|; 0 for an empty test split.
  double anomaly_ratio() const;
};

// Character-length statistics (Unicode scalar values). std is the population
// standard deviation.
struct TextStats {
  double avg = 0.0;
  std::size_t max = 0;
  std::size_t min = 0;
  double std = 0.0;
};

// Throws InvalidArgument when the spec violates its invariants.
void validate_spec(const DatasetSpec& spec);

// Reads a JSON spec file:
//   {"name", "original_task", "normal_categories": [...], "anomaly_category",
//    "anomaly_known"?: bool, "expected"?: {"train", "test", "anomaly_percent"}}
DatasetSpec load_dataset_spec(const std::filesystem::path& path);

// Loads JSONL splits with {"text", "category"} (and optional "id") per line.
// Labels come from the spec. Blank lines are skipped; everything else that is
// not a valid record fails with the 1-based line number in the message.
Dataset load_dataset(const std::filesystem::path& train_path,
                     const std::filesystem::path& test_path, const DatasetSpec& spec);

// Parses one split. `is_train` rejects anomaly-category samples.
std::vector<Sample> read_samples_jsonl(const std::filesystem::path& path,
                                       const DatasetSpec& spec, bool is_train,
                                       const std::string& id_prefix);

// Writes {"id","text","category"} lines. Labels are never written.
void write_samples_jsonl(const std::filesystem::path& path, std::span<const Sample> samples);

TextStats compute_text_stats(std::span<const Sample> samples);

// Keeps exactly v train samples per normal category, drawn uniformly without
// replacement under `seed`. Selected samples keep their original file order.
Dataset sample_small_train(const Dataset& dataset, std::size_t v, std::uint64_t seed);

}  // namespace adlab

#endif  // ADLAB_CORPUS_HPP_
