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

#ifndef ADLAB_MODELSEL_HPP_
#define ADLAB_MODELSEL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adlab/corpus.hpp"
#include "adlab/eval.hpp"
#include "adlab/llm.hpp"

namespace adlab {

// The 16 selectable two-step options, in the order the selection prompt
// lists them: "BERT+AE", ..., "OpenAI+VAE".
const std::vector<std::string>& canonical_options();
bool is_canonical_option(const std::string& option_id);

// Detector keys in prompt order: AE, DeepSVDD, ECOD, IForest, LOF, LUNAR,
// SO-GAAL, VAE. Embedding keys: BERT, OpenAI.
const std::vector<std::string>& ums_detector_keys();
const std::vector<std::string>& ums_embedding_keys();

// Abstract text per detector and embedding key.
struct AbstractCatalog {
  std::map<std::string, std::string> detectors;
  std::map<std::string, std::string> embeddings;

  // {"detectors": {key: text}, "embeddings": {key: text}}
  static AbstractCatalog parse(const std::string& json_text);
  static AbstractCatalog load(const std::filesystem::path& path);
  // The placeholder catalog shipped with the library.
  static AbstractCatalog bundled();
};

struct CandidateModel {
  std::string option_id;
  std::string embedding_name;
  std::string detector_name;
  std::string abstract_text;  // detector abstract
};

// All 16 options with their detector abstracts attached.
std::vector<CandidateModel> candidate_models(const AbstractCatalog& catalog);

struct UmsContext {
  DatasetSpec spec;
  std::size_t size = 0;
  TextStats stats;
  Sample normal_example;
  Sample anomaly_example;
  AbstractCatalog abstracts;
};

// Size = |test|; stats over train and test together; examples drawn
// uniformly under `seed`, the normal one from train and the anomaly from
// test. Throws DataError when no anomaly
// exists in test.
UmsContext make_ums_context(const Dataset& dataset, const AbstractCatalog& abstracts,
                            std::uint64_t seed);

// Instantiates the selection template. With no_context the dataset and
// model information blocks are left out. Throws InvalidArgument when an
// abstract is missing or empty.
std::string build_ums_prompt(const UmsContext& ctx, bool no_context = false);

struct ModelChoice {
  std::string reason;
  std::string choice;
  int query_index = 0;

  friend bool operator==(const ModelChoice&, const ModelChoice&) = default;
};

// Throws LlmError: kMalformedOutput for missing JSON or keys,
// kFormatViolation for a choice outside the canonical set (after trimming).
ModelChoice parse_model_choice(const std::string& text);

struct SelectionConfig {
  std::string model_id;
  // Unset leaves the provider default in place.
  std::optional<double> temperature;
  // Query i uses seed + i.
  std::optional<std::int64_t> seed = 42;
  int max_tokens = kKeywordMaxTokens;
  int max_in_flight = 1;
  std::function<void(const std::string&)> log;
};

struct SelectionRun {
  std::vector<ModelChoice> choices;
  std::vector<std::pair<int, LlmFailure>> failures;  // (query index, failure)
  std::size_t n_queries = 0;
};

// Issues n_queries completions (n_queries >= 1) and parses each; failed
// queries are logged and excluded. Transport failures and replay misses
// propagate.
SelectionRun run_model_selection(const std::string& prompt, ChatProvider& provider,
                                 std::size_t n_queries, const SelectionConfig& config);

struct ChoiceAggregate {
  std::map<std::string, std::size_t> counts;
  std::size_t total_queries = 0;

  // Sorted by count descending, then option id ascending.
  std::vector<std::pair<std::string, std::size_t>> ranked() const;
  // "OpenAI+LUNAR (13), OpenAI+ECOD (8)" for k = 2.
  std::string top_k(std::size_t k) const;
};

ChoiceAggregate aggregate_choices(const std::vector<ModelChoice>& choices,
                                  std::size_t failures = 0);

// The bundled baseline results table (CSV: option_id,dataset,auroc,auprc).
const ResultTable& bundled_baseline_table();
ResultTable parse_baseline_table_csv(const std::string& csv_text);

// Throws DataError when the cell is absent.
MetricPair lookup_baseline_performance(const std::string& option_id,
                                       const std::string& dataset_name);

// Mean of the looked-up pairs over all choices (duplicates count).
MetricPair evaluate_selection(const std::vector<ModelChoice>& choices,
                              const std::string& dataset_name);

// Mean and per-metric maximum over the 16 selectable options.
MetricPair baseline_average(const std::string& dataset_name);
MetricPair best_performance(const std::string& dataset_name);

}  // namespace adlab

#endif  // ADLAB_MODELSEL_HPP_
