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

#ifndef ADLAB_EVAL_HPP_
#define ADLAB_EVAL_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace adlab {

// Higher score = more anomalous; label 1 = anomaly (positive class).
struct LabeledScores {
  std::vector<double> scores;
  std::vector<int> labels;
};

struct MetricPair {
  double auroc = 0.0;
  double auprc = 0.0;

  friend bool operator==(const MetricPair&, const MetricPair&) = default;
};

// Mann-Whitney formulation with average ranks for tied scores:
//   (sum of positive ranks - n+(n+ + 1)/2) / (n+ n-)
// Throws InvalidArgument unless both classes are present and lengths match.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Average precision, sum over thresholds of (R_t - R_{t-1}) * P_t. Scores
// that tie form a single threshold and the result does not depend on input
// order.
double auprc(std::span<const double> scores, std::span<const int> labels);

MetricPair evaluate(std::span<const double> scores, std::span<const int> labels);
inline MetricPair evaluate(const LabeledScores& data) { return evaluate(data.scores, data.labels); }

enum class DeltaColor { kNone, kGreen, kRed };

// Changes smaller than this magnitude stay uncolored.
inline constexpr double kDeltaColorThreshold = 0.03;

DeltaColor classify_delta(double delta);
const char* to_string(DeltaColor c);

struct DeltaCell {
  double value = 0.0;
  double delta = 0.0;
  DeltaColor color = DeltaColor::kNone;
};

DeltaCell make_delta_cell(double value, double baseline);

// Method x dataset grid of metric pairs. Row and column order follow first
// insertion.
class ResultTable {
 public:
  void set(const std::string& method, const std::string& dataset, MetricPair m);
  std::optional<MetricPair> get(const std::string& method, const std::string& dataset) const;

  const std::vector<std::string>& methods() const { return methods_; }
  const std::vector<std::string>& datasets() const { return datasets_; }
  bool empty() const { return cells_.empty(); }

  // Provenance note carried into reports (e.g. which run produced it).
  std::string provenance;

  friend bool operator==(const ResultTable&, const ResultTable&) = default;

 private:
  std::vector<std::string> methods_;
  std::vector<std::string> datasets_;
  std::map<std::pair<std::string, std::string>, MetricPair> cells_;
};

struct DeltaPair {
  DeltaCell auroc;
  DeltaCell auprc;
};

struct DeltaTable {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  std::map<std::pair<std::string, std::string>, DeltaPair> cells;
  std::string baseline_provenance;
};

// Per-cell change of `current` relative to `baseline`. Both tables must hold
// exactly the same (method, dataset) keys.
DeltaTable delta_table(const ResultTable& current, const ResultTable& baseline);

enum class ReportFormat { kMarkdown, kCsv, kJson };

std::string render_report(const ResultTable& table, ReportFormat format);
std::string render_delta_report(const DeltaTable& table, ReportFormat format);

// Writes render_report(...) to path; throws IoError on failure.
void emit_report(const ResultTable& table, ReportFormat format, const std::filesystem::path& path);
void emit_delta_report(const DeltaTable& table, ReportFormat format,
                       const std::filesystem::path& path);

// Reads the JSON form produced by render_report.
ResultTable parse_result_table_json(const std::string& json_text);
ResultTable read_result_table_json(const std::filesystem::path& path);

}  // namespace adlab

#endif  // ADLAB_EVAL_HPP_
