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

#include "adlab/modelsel.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>

#include "adlab/random.hpp"
#include "json_extract.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace adlab {

namespace detail {
std::string_view bundled_baseline_table_csv();
std::string_view bundled_abstracts_json();
}  // namespace detail

using nlohmann::json;

const std::vector<std::string>& ums_detector_keys() {
  static const std::vector<std::string> kKeys = {"AE",  "DeepSVDD", "ECOD",    "IForest",
                                                 "LOF", "LUNAR",    "SO-GAAL", "VAE"};
  return kKeys;
}

const std::vector<std::string>& ums_embedding_keys() {
  static const std::vector<std::string> kKeys = {"BERT", "OpenAI"};
  return kKeys;
}

namespace {

// Option ids spell Isolation Forest as "iForest".
std::string option_detector_name(const std::string& key) {
  return key == "IForest" ? "iForest" : key;
}

}  // namespace

const std::vector<std::string>& canonical_options() {
  static const std::vector<std::string> kOptions = [] {
    std::vector<std::string> v;
    for (const auto& e : ums_embedding_keys()) {
      for (const auto& d : ums_detector_keys()) v.push_back(e + "+" + option_detector_name(d));
    }
    return v;
  }();
  return kOptions;
}

bool is_canonical_option(const std::string& option_id) {
  const auto& v = canonical_options();
  return std::find(v.begin(), v.end(), option_id) != v.end();
}

AbstractCatalog AbstractCatalog::parse(const std::string& json_text) {
  auto j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("abstract catalog is not a JSON object");
  AbstractCatalog c;
  const auto read = [&](const char* section, std::map<std::string, std::string>& into) {
    if (!j.contains(section)) return;
    for (const auto& [k, v] : j[section].items()) {
      if (!v.is_string()) throw DataError(std::string("abstract for ") + k + " is not a string");
      into[k] = v.get<std::string>();
    }
  };
  read("detectors", c.detectors);
  read("embeddings", c.embeddings);
  return c;
}

AbstractCatalog AbstractCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

AbstractCatalog AbstractCatalog::bundled() {
  return parse(std::string(detail::bundled_abstracts_json()));
}

std::vector<CandidateModel> candidate_models(const AbstractCatalog& catalog) {
  std::vector<CandidateModel> out;
  for (const auto& e : ums_embedding_keys()) {
    for (const auto& d : ums_detector_keys()) {
      auto it = catalog.detectors.find(d);
      if (it == catalog.detectors.end()) throw InvalidArgument("missing abstract for " + d);
      out.push_back({e + "+" + option_detector_name(d), e, d, it->second});
    }
  }
  return out;
}

UmsContext make_ums_context(const Dataset& dataset, const AbstractCatalog& abstracts,
                            std::uint64_t seed) {
  std::vector<const Sample*> normals;
  std::vector<const Sample*> anomalies;
  for (const auto& s : dataset.train) normals.push_back(&s);
  if (normals.empty()) {
    for (const auto& s : dataset.test) {
      if (s.label == kNormal) normals.push_back(&s);
    }
  }
  for (const auto& s : dataset.test) {
    if (s.label == kAnomaly) anomalies.push_back(&s);
  }
  if (normals.empty()) throw DataError(dataset.spec.name + " has no normal sample to show");
  if (anomalies.empty()) throw DataError(dataset.spec.name + " has no anomaly sample to show");

  std::vector<Sample> all = dataset.train;
  all.insert(all.end(), dataset.test.begin(), dataset.test.end());

  Rng rng(seed);
  UmsContext ctx;
  ctx.spec = dataset.spec;
  ctx.size = dataset.test.size();
  ctx.stats = compute_text_stats(all);
  ctx.normal_example = *normals[rng.uniform_index(normals.size())];
  ctx.anomaly_example = *anomalies[rng.uniform_index(anomalies.size())];
  ctx.abstracts = abstracts;
  return ctx;
}

ModelChoice parse_model_choice(const std::string& text) {
  auto obj = detail::extract_first_json_object(text);
  if (!obj) throw LlmError(FailureKind::kMalformedOutput, "no JSON object in selection response");
  if (!obj->contains("choice") || !(*obj)["choice"].is_string()) {
    throw LlmError(FailureKind::kMalformedOutput, "missing string key \"choice\"");
  }
  if (!obj->contains("reason") || !(*obj)["reason"].is_string()) {
    throw LlmError(FailureKind::kMalformedOutput, "missing string key \"reason\"");
  }
  ModelChoice c;
  c.reason = (*obj)["reason"].get<std::string>();
  c.choice = std::string(text::trim((*obj)["choice"].get<std::string>()));
  if (!is_canonical_option(c.choice)) {
    throw LlmError(FailureKind::kFormatViolation, "unknown option '" + c.choice + "'");
  }
  return c;
}

SelectionRun run_model_selection(const std::string& prompt, ChatProvider& provider,
                                 std::size_t n_queries, const SelectionConfig& config) {
  if (n_queries == 0) throw InvalidArgument("model selection needs at least one query");
  if (config.model_id.empty()) throw InvalidArgument("model selection needs a model id");
  std::vector<std::optional<ModelChoice>> picks(n_queries);
  std::vector<std::optional<LlmFailure>> failed(n_queries);
  const int in_flight = std::clamp(config.max_in_flight, 1, 2);
  detail::bounded_parallel_for(n_queries, in_flight, [&](std::size_t i) {
    ChatRequest req;
    req.prompt = prompt;
    req.temperature = config.temperature;
    if (config.seed) req.seed = *config.seed + static_cast<std::int64_t>(i);
    req.max_tokens = config.max_tokens;
    req.model_id = config.model_id;
    const auto outcome = provider.complete(req);
    if (outcome.finish_reason == FinishReason::kFiltered) {
      failed[i] = LlmFailure{FailureKind::kSafetyRefusal, "provider content filter"};
      return;
    }
    try {
      auto c = parse_model_choice(outcome.text);
      c.query_index = static_cast<int>(i);
      picks[i] = std::move(c);
    } catch (const LlmError& e) {
      failed[i] = e.failure();
    }
  });
  SelectionRun run;
  run.n_queries = n_queries;
  for (std::size_t i = 0; i < n_queries; ++i) {
    if (picks[i]) {
      run.choices.push_back(std::move(*picks[i]));
    } else {
      if (config.log) {
        config.log("query " + std::to_string(i) + " failed: " + to_string(failed[i]->kind) +
                   ": " + failed[i]->detail);
      }
      run.failures.emplace_back(static_cast<int>(i), *failed[i]);
    }
  }
  return run;
}

std::vector<std::pair<std::string, std::size_t>> ChoiceAggregate::ranked() const {
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return v;
}

std::string ChoiceAggregate::top_k(std::size_t k) const {
  const auto r = ranked();
  std::string out;
  for (std::size_t i = 0; i < std::min(k, r.size()); ++i) {
    if (i) out += ", ";
    out += r[i].first + " (" + std::to_string(r[i].second) + ")";
  }
  return out;
}

ChoiceAggregate aggregate_choices(const std::vector<ModelChoice>& choices, std::size_t failures) {
  ChoiceAggregate agg;
  for (const auto& c : choices) ++agg.counts[c.choice];
  agg.total_queries = choices.size() + failures;
  return agg;
}

// ---------------------------------------------------------------------------

ResultTable parse_baseline_table_csv(const std::string& csv_text) {
  ResultTable table;
  std::istringstream in(csv_text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      if (t != "option_id,dataset,auroc,auprc") {
        throw DataError("baseline table: unexpected header '" + std::string(t) + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls{std::string(t)};
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 4) {
      throw DataError("baseline table line " + std::to_string(line_no) + ": expected 4 fields");
    }
    MetricPair m;
    for (int k = 0; k < 2; ++k) {
      const auto& s = f[2 + k];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !(v >= 0.0 && v <= 1.0)) {
        throw DataError("baseline table line " + std::to_string(line_no) + ": bad metric '" + s +
                        "'");
      }
      (k == 0 ? m.auroc : m.auprc) = v;
    }
    table.set(f[0], f[1], m);
  }
  table.provenance = "bundled baseline table";
  return table;
}

const ResultTable& bundled_baseline_table() {
  static const ResultTable kTable =
      parse_baseline_table_csv(std::string(detail::bundled_baseline_table_csv()));
  return kTable;
}

MetricPair lookup_baseline_performance(const std::string& option_id,
                                       const std::string& dataset_name) {
  auto m = bundled_baseline_table().get(option_id, dataset_name);
  if (!m) {
    throw DataError("no baseline result for (" + option_id + ", " + dataset_name + ")");
  }
  return *m;
}

namespace {

// first + mean(x - first). Equal inputs return the first value exactly.
MetricPair mean_of(const std::vector<MetricPair>& pairs) {
  const MetricPair& ref = pairs.front();
  MetricPair dev;
  for (const auto& m : pairs) {
    dev.auroc += m.auroc - ref.auroc;
    dev.auprc += m.auprc - ref.auprc;
  }
  const auto n = static_cast<double>(pairs.size());
  return {ref.auroc + dev.auroc / n, ref.auprc + dev.auprc / n};
}

}  // namespace

MetricPair evaluate_selection(const std::vector<ModelChoice>& choices,
                              const std::string& dataset_name) {
  if (choices.empty()) throw InvalidArgument("evaluate_selection: no choices");
  std::vector<MetricPair> pairs;
  for (const auto& c : choices) pairs.push_back(lookup_baseline_performance(c.choice, dataset_name));
  return mean_of(pairs);
}

MetricPair baseline_average(const std::string& dataset_name) {
  std::vector<MetricPair> pairs;
  for (const auto& o : canonical_options()) pairs.push_back(lookup_baseline_performance(o, dataset_name));
  return mean_of(pairs);
}

MetricPair best_performance(const std::string& dataset_name) {
  MetricPair best{0.0, 0.0};
  for (const auto& o : canonical_options()) {
    const auto m = lookup_baseline_performance(o, dataset_name);
    best.auroc = std::max(best.auroc, m.auroc);
    best.auprc = std::max(best.auprc, m.auprc);
  }
  return best;
}

}  // namespace adlab
