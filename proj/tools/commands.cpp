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

#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "adlab/augment.hpp"
#include "adlab/corpus.hpp"
#include "adlab/detectors.hpp"
#include "adlab/embed.hpp"
#include "adlab/error.hpp"
#include "adlab/eval.hpp"
#include "adlab/llm.hpp"
#include "adlab/modelsel.hpp"
#include "adlab/random.hpp"
#include "adlab/zeroshot.hpp"
#include "json.hpp"

namespace adlab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fmt4(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << v;
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

const std::string& require(const std::optional<std::string>& v, const char* flag) {
  if (!v || v->empty()) throw UsageError(std::string("missing required option ") + flag);
  return *v;
}

fs::path prepare_out(const RunManifest& m) {
  const fs::path out = require(m.out, "--out");
  fs::create_directories(out);
  write_file(out / "manifest.json", manifest_to_json(m));
  return out;
}

Dataset load_dataset_dir(const RunManifest& m) {
  const fs::path dir = require(m.dataset, "--dataset");
  if (!fs::is_directory(dir)) throw UsageError("dataset directory not found: " + dir.string());
  for (const char* f : {"spec.json", "train.jsonl", "test.jsonl"}) {
    if (!fs::exists(dir / f)) throw UsageError("dataset directory lacks " + std::string(f));
  }
  const auto spec = load_dataset_spec(dir / "spec.json");
  return load_dataset(dir / "train.jsonl", dir / "test.jsonl", spec);
}

std::shared_ptr<ChatProvider> make_provider(const RunManifest& m) {
  if (m.provider == "replay") {
    const fs::path store = require(m.replay_store, "--replay-store");
    if (!fs::exists(store)) throw UsageError("replay store not found: " + store.string());
    return std::make_shared<ReplayChatProvider>(std::make_shared<ReplayStore>(store));
  }
  if (m.provider == "live" || m.provider == "record") {
    auto config = LiveEndpointConfig::from_environment();
    if (config.api_key.empty()) throw UsageError("ADLAB_API_KEY is not set");
    auto live = std::make_shared<LiveChatProvider>(config);
    if (m.provider == "live") return live;
    const fs::path store = require(m.replay_store, "--replay-store");
    return std::make_shared<RecordingChatProvider>(live, std::make_shared<ReplayStore>(store));
  }
  throw UsageError("unknown provider '" + m.provider + "' (expected live, replay or record)");
}

std::string error_table(const ErrorCounts& counts) {
  std::string s = "| Failure | Count |\n|---|---:|\n";
  for (int k = 0; k < kFailureKindCount; ++k) {
    s += std::string("| ") + to_string(static_cast<FailureKind>(k)) + " | " +
         std::to_string(counts[static_cast<std::size_t>(k)]) + " |\n";
  }
  return s;
}

// ---------------------------------------------------------------------------

int cmd_detect(const RunManifest& m, std::ostream& out) {
  const auto setting = parse_detection_setting(m.setting);
  const auto& model = require(m.model, "--model");
  auto dataset = load_dataset_dir(m);
  auto ctx = PromptContext::from_spec(dataset.spec, setting);
  if (m.descriptions) ctx = enrich_context(ctx, read_descriptions_json(*m.descriptions, dataset.spec));
  if (m.subsample && *m.subsample < dataset.test.size()) {
    Rng rng(static_cast<std::uint64_t>(m.seed));
    std::vector<std::size_t> idx(dataset.test.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < *m.subsample; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    }
    idx.resize(*m.subsample);
    std::sort(idx.begin(), idx.end());
    std::vector<Sample> picked;
    for (auto i : idx) picked.push_back(dataset.test[i]);
    dataset.test = std::move(picked);
  }
  auto provider = make_provider(m);
  const fs::path dir = prepare_out(m);

  ZeroShotConfig config;
  config.model_id = model;
  config.temperature = m.temperature.value_or(0.0);
  config.seed = m.seed;
  config.max_in_flight = m.max_in_flight;
  config.journal = dir / "records.jsonl";
  if (m.provider != "replay") config.transport_attempts = 1;
  const auto result = run_zero_shot(dataset, ctx, setting, *provider, config);
  if (result.resumed > 0) out << "resumed " << result.resumed << " records from the journal\n";

  std::string method = model + " (" + to_string(setting) + ")";
  if (m.descriptions) method += " + descriptions";
  ResultTable table;
  table.provenance = "zero-shot detection, " + model + ", " + to_string(setting);
  const auto scored = result.scored();
  const auto metrics = evaluate(scored);
  table.set(method, dataset.spec.name, metrics);

  ordered_json errors = ordered_json::object();
  for (int k = 0; k < kFailureKindCount; ++k) {
    errors[to_string(static_cast<FailureKind>(k))] = result.error_counts[static_cast<std::size_t>(k)];
  }
  ordered_json summary = {{"dataset", dataset.spec.name},
                          {"setting", to_string(setting)},
                          {"model", model},
                          {"test_samples", result.records.size()},
                          {"scored", scored.scores.size()},
                          {"excluded", result.failures()},
                          {"auroc", metrics.auroc},
                          {"auprc", metrics.auprc},
                          {"error_counts", errors}};
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  emit_report(table, ReportFormat::kJson, dir / "report.json");
  emit_report(table, ReportFormat::kCsv, dir / "report.csv");
  std::string md = "# Zero-shot detection: " + dataset.spec.name + "\n\n" +
                   render_report(table, ReportFormat::kMarkdown) + "\n## Errors\n\n" +
                   error_table(result.error_counts) + "\nScored " +
                   std::to_string(scored.scores.size()) + " of " +
                   std::to_string(result.records.size()) + " test samples; " +
                   std::to_string(result.failures()) + " excluded.\n";
  write_file(dir / "report.md", md);
  out << dataset.spec.name << ": AUROC " << fmt4(metrics.auroc) << ", AUPRC "
      << fmt4(metrics.auprc) << " (" << result.failures() << " excluded)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_augment(const RunManifest& m, std::ostream& out) {
  const auto& model = require(m.model, "--model");
  if (m.rounds < 1 || m.rounds > 4) throw UsageError("--rounds must be between 1 and 4");
  const auto dataset = load_dataset_dir(m);
  auto provider = make_provider(m);
  const fs::path dir = prepare_out(m);

  if (!m.descriptions_only) {
    const auto small = sample_small_train(dataset, m.v, static_cast<std::uint64_t>(m.seed));
    SynthRunConfig config;
    config.model_id = model;
    config.max_in_flight = m.max_in_flight;
    config.journal = dir / "synth_journal.jsonl";
    config.log = [&](const std::string& msg) { out << msg << '\n'; };
    const auto run = run_synth_rounds(dataset.spec, m.t, default_round_schedule(m.rounds),
                                      *provider, config);
    const auto combined = build_dataset_with_synth(small, run.samples);
    write_samples_jsonl(dir / "small_train.jsonl", small.train);
    write_synth_samples(dir / "synth.jsonl", run.samples);
    write_samples_jsonl(dir / "train_da.jsonl", combined.train);
    ordered_json rounds = ordered_json::array();
    for (const auto& r : run.rounds) {
      rounds.push_back({{"round", r.round_index},
                        {"temperature", r.temperature},
                        {"seed", r.seed},
                        {"parsed_groups", r.parsed_groups},
                        {"duplicates_removed", r.duplicates_removed},
                        {"samples", r.samples}});
    }
    ordered_json summary = {{"dataset", dataset.spec.name},
                            {"v", m.v},
                            {"t", m.t},
                            {"rounds", rounds},
                            {"small_train", small.train.size()},
                            {"synth", run.samples.size()},
                            {"train_da", combined.train.size()}};
    write_file(dir / "synth_summary.json", summary.dump(2) + "\n");
    out << "synthetic samples: " << run.samples.size() << "; D_DA: " << combined.train.size()
        << '\n';
  }

  if (m.descriptions_only || m.with_descriptions) {
    ChatRequest req;
    req.prompt = build_description_prompt(dataset.spec);
    req.temperature = kDescriptionTemperature;
    req.seed = m.seed;
    req.max_tokens = kKeywordMaxTokens;
    req.model_id = model;
    const auto descriptions = parse_descriptions(provider->complete(req).text, dataset.spec);
    write_descriptions_json(dir / "descriptions.json", descriptions);
    out << "descriptions: " << descriptions.size() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingVector> embed_samples(const RunManifest& m, const std::vector<Sample>& samples,
                                           const fs::path& dir) {
  if (m.embeddings == "import") {
    const auto table = import_embeddings(require(m.embeddings_path, "--embeddings-path"));
    std::vector<EmbeddingVector> v;
    for (const auto& s : samples) {
      auto it = table.find(s.id);
      if (it == table.end()) throw DataError("imported embeddings lack sample " + s.id);
      v.push_back(it->second);
    }
    return v;
  }
  std::vector<std::string> texts;
  for (const auto& s : samples) texts.push_back(s.text);
  EmbedOptions options;
  options.max_in_flight = m.max_in_flight;
  if (m.embeddings == "fixture") {
    FixtureEmbeddingProvider provider(require(m.embeddings_path, "--embeddings-path"));
    return embed_batch(texts, m.embedding_model, provider, nullptr, options);
  }
  if (m.embeddings == "live") {
    auto config = LiveEndpointConfig::from_environment();
    if (config.api_key.empty()) throw UsageError("ADLAB_API_KEY is not set");
    LiveEmbeddingProvider provider(config);
    EmbeddingCache cache(dir / "embedding_cache.bin");
    return embed_batch(texts, m.embedding_model, provider, &cache, options);
  }
  throw UsageError("unknown embeddings source '" + m.embeddings + "' (fixture, live or import)");
}

Matrix to_matrix(const std::vector<EmbeddingVector>& v, std::size_t begin, std::size_t end) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = begin; i < end; ++i) rows.push_back(v[i].values);
  return Matrix::from_rows(rows);
}

int cmd_baselines(const RunManifest& m, std::ostream& out) {
  std::vector<DetectorKind> kinds;
  for (const auto& d : m.detectors) kinds.push_back(parse_detector_kind(d));
  if (kinds.empty()) throw UsageError("no detectors selected");
  const auto dataset = load_dataset_dir(m);
  const auto small = sample_small_train(dataset, m.v, static_cast<std::uint64_t>(m.seed));
  std::vector<Sample> synth;
  if (m.synth) synth = read_samples_jsonl(*m.synth, dataset.spec, true, "synth:");
  const fs::path dir = prepare_out(m);

  std::vector<Sample> all = small.train;
  all.insert(all.end(), synth.begin(), synth.end());
  all.insert(all.end(), dataset.test.begin(), dataset.test.end());
  const auto vectors = embed_samples(m, all, dir);
  const std::size_t n_small = small.train.size();
  const std::size_t n_train = n_small + synth.size();
  const Matrix X_small = to_matrix(vectors, 0, n_small);
  const Matrix X_da = to_matrix(vectors, 0, n_train);
  const Matrix X_test = to_matrix(vectors, n_train, vectors.size());
  std::vector<int> labels;
  std::vector<std::string> test_ids;
  for (const auto& s : dataset.test) {
    labels.push_back(s.label);
    test_ids.push_back(s.id);
  }

  DetectorParams params;
  ResultTable without;
  without.provenance = "trained on D_small_train (v=" + std::to_string(m.v) + ")";
  ResultTable with;
  with.provenance = "trained on D_small_train + D_synth";
  for (auto kind : kinds) {
    const std::string name = to_string(kind);
    params.lof.k = LofParams{}.k;
    if (kind == DetectorKind::kLof && n_small > 1 && params.lof.k > n_small - 1) {
      params.lof.k = n_small - 1;
      out << "LOF: k lowered to " << params.lof.k << " for " << n_small << " training rows\n";
    }
    const auto s0 = fit(kind, X_small, params, static_cast<std::uint64_t>(m.seed)).score(X_test);
    write_scores_csv(dir / ("scores_" + name + ".csv"), test_ids, s0);
    without.set(name, dataset.spec.name, evaluate(s0, labels));
    if (!synth.empty()) {
      if (kind == DetectorKind::kLof) params.lof.k = std::min(LofParams{}.k, n_train - 1);
      const auto s1 = fit(kind, X_da, params, static_cast<std::uint64_t>(m.seed)).score(X_test);
      write_scores_csv(dir / ("scores_" + name + "_synth.csv"), test_ids, s1);
      with.set(name, dataset.spec.name, evaluate(s1, labels));
    }
  }

  emit_report(without, ReportFormat::kJson, dir / "report_small.json");
  std::string md = "# Two-step baselines: " + dataset.spec.name + "\n\n## Without synthetic data\n\n" +
                   render_report(without, ReportFormat::kMarkdown);
  if (!synth.empty()) {
    const auto delta = delta_table(with, without);
    md += "\n## With synthetic data\n\n" + render_delta_report(delta, ReportFormat::kMarkdown);
    emit_report(with, ReportFormat::kJson, dir / "report.json");
    emit_delta_report(delta, ReportFormat::kJson, dir / "delta.json");
    emit_delta_report(delta, ReportFormat::kCsv, dir / "delta.csv");
  } else {
    emit_report(without, ReportFormat::kJson, dir / "report.json");
  }
  write_file(dir / "report.md", md);
  out << "baselines written to " << dir.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_select(const RunManifest& m, std::ostream& out) {
  if (m.n_queries == 0) throw UsageError("--n-queries must be at least 1");
  const auto& model = require(m.model, "--model");
  const auto abstracts = m.abstracts ? AbstractCatalog::load(*m.abstracts) : AbstractCatalog::bundled();
  UmsContext ctx;
  ctx.abstracts = abstracts;
  std::optional<std::string> dataset_name;
  if (!m.no_context || m.dataset) {
    const auto dataset = load_dataset_dir(m);
    dataset_name = dataset.spec.name;
    if (!m.no_context) ctx = make_ums_context(dataset, abstracts, static_cast<std::uint64_t>(m.seed));
  }
  const std::string prompt = build_ums_prompt(ctx, m.no_context);
  auto provider = make_provider(m);
  const fs::path dir = prepare_out(m);
  write_file(dir / "prompt.txt", prompt);

  SelectionConfig config;
  config.model_id = model;
  config.temperature = m.temperature;
  config.seed = m.seed;
  config.max_in_flight = std::min(m.max_in_flight, 2);
  config.log = [&](const std::string& msg) { out << msg << '\n'; };
  const auto run = run_model_selection(prompt, *provider, m.n_queries, config);
  const auto agg = aggregate_choices(run.choices, run.failures.size());

  ordered_json choices = ordered_json::array();
  for (const auto& c : run.choices) {
    choices.push_back({{"query", c.query_index}, {"choice", c.choice}, {"reason", c.reason}});
  }
  ordered_json failures = ordered_json::array();
  for (const auto& [q, f] : run.failures) {
    failures.push_back({{"query", q}, {"kind", to_string(f.kind)}, {"detail", f.detail}});
  }
  ordered_json counts = ordered_json::array();
  for (const auto& [id, n] : agg.ranked()) counts.push_back({{"option", id}, {"count", n}});
  ordered_json report = {{"model", model},
                         {"context", m.no_context ? "none" : "dataset+models"},
                         {"dataset", dataset_name ? ordered_json(*dataset_name) : ordered_json()},
                         {"n_queries", run.n_queries},
                         {"choices", choices},
                         {"failures", failures},
                         {"counts", counts},
                         {"top2", agg.top_k(2)}};

  std::string md = "# Model selection" + (dataset_name ? ": " + *dataset_name : std::string()) +
                   "\n\nContext: " + (m.no_context ? "none" : "dataset and model information") +
                   "\n\nQueries: " + std::to_string(run.n_queries) + ", parsed: " +
                   std::to_string(run.choices.size()) + ", failed: " +
                   std::to_string(run.failures.size()) + "\n\nTop-2 picks (counts): " +
                   agg.top_k(2) + "\n";
  if (dataset_name && !run.choices.empty()) {
    try {
      const auto picked = evaluate_selection(run.choices, *dataset_name);
      const auto avg = baseline_average(*dataset_name);
      const auto best = best_performance(*dataset_name);
      report["evaluation"] = {
          {"selected", {{"auroc", picked.auroc}, {"auprc", picked.auprc}}},
          {"baseline_average", {{"auroc", avg.auroc}, {"auprc", avg.auprc}}},
          {"best_performance", {{"auroc", best.auroc}, {"auprc", best.auprc}}}};
      md += "\n| Setting | AUROC | AUPRC |\n|---|---:|---:|\n";
      md += "| " + model + " | " + fmt4(picked.auroc) + " | " + fmt4(picked.auprc) + " |\n";
      md += "| Baseline Average | " + fmt4(avg.auroc) + " | " + fmt4(avg.auprc) + " |\n";
      md += "| Best Performance | " + fmt4(best.auroc) + " | " + fmt4(best.auprc) + " |\n";
    } catch (const DataError& e) {
      md += "\nNo bundled baseline results for this dataset: " + std::string(e.what()) + "\n";
    }
  }
  write_file(dir / "selection.json", report.dump(2) + "\n");
  write_file(dir / "selection.md", md);
  out << "top-2: " << agg.top_k(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_report(const std::vector<std::string>& inputs, const std::optional<std::string>& out_dir,
               std::ostream& out) {
  if (inputs.empty() || inputs.size() > 2) throw UsageError("report takes one or two run outputs");
  const fs::path dir = require(out_dir, "--out");
  std::vector<ResultTable> tables;
  for (const auto& in : inputs) {
    fs::path p = in;
    if (fs::is_directory(p)) p /= "report.json";
    if (!fs::exists(p)) throw UsageError("no report found at " + p.string());
    auto t = read_result_table_json(p);
    if (t.provenance.empty()) t.provenance = in;
    tables.push_back(std::move(t));
  }
  fs::create_directories(dir);
  if (tables.size() == 1) {
    emit_report(tables[0], ReportFormat::kMarkdown, dir / "report.md");
    emit_report(tables[0], ReportFormat::kCsv, dir / "report.csv");
    emit_report(tables[0], ReportFormat::kJson, dir / "report.json");
  } else {
    // Rows are matched by dataset; method labels come from the newer run.
    ResultTable base = tables[0];
    const ResultTable& cur = tables[1];
    if (base.methods().size() == 1 && cur.methods().size() == 1 &&
        base.methods()[0] != cur.methods()[0]) {
      ResultTable relabeled;
      relabeled.provenance = base.provenance + " (" + base.methods()[0] + ")";
      for (const auto& d : base.datasets()) {
        if (auto c = base.get(base.methods()[0], d)) relabeled.set(cur.methods()[0], d, *c);
      }
      base = relabeled;
    }
    const auto delta = delta_table(cur, base);
    emit_delta_report(delta, ReportFormat::kMarkdown, dir / "report.md");
    emit_delta_report(delta, ReportFormat::kCsv, dir / "report.csv");
    emit_delta_report(delta, ReportFormat::kJson, dir / "report.json");
  }
  out << "report written to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string manifest_to_json(const RunManifest& m) {
  ordered_json j;
  const auto opt = [](const auto& o) { return o ? ordered_json(*o) : ordered_json(); };
  j["command"] = m.command;
  j["dataset"] = opt(m.dataset);
  j["provider"] = m.provider;
  j["replay_store"] = opt(m.replay_store);
  j["model"] = opt(m.model);
  j["seed"] = m.seed;
  j["out"] = opt(m.out);
  j["max_in_flight"] = m.max_in_flight;
  if (m.command == "detect") {
    j["setting"] = m.setting;
    j["temperature"] = m.temperature.value_or(0.0);
    j["descriptions"] = opt(m.descriptions);
    j["subsample"] = opt(m.subsample);
    j["prompt_template_version"] = m.prompt_template_version;
  } else if (m.command == "augment") {
    j["v"] = m.v;
    j["t"] = m.t;
    j["rounds"] = m.rounds;
    j["descriptions_only"] = m.descriptions_only;
    j["with_descriptions"] = m.with_descriptions;
    j["description_temperature"] = kDescriptionTemperature;
    j["prompt_template_version"] = m.prompt_template_version;
  } else if (m.command == "baselines") {
    j["v"] = m.v;
    j["detectors"] = m.detectors;
    j["embeddings"] = m.embeddings;
    j["embeddings_path"] = opt(m.embeddings_path);
    j["embedding_model"] = m.embedding_model;
    j["synth"] = opt(m.synth);
  } else if (m.command == "select") {
    j["n_queries"] = m.n_queries;
    j["no_context"] = m.no_context;
    j["abstracts"] = opt(m.abstracts);
    j["temperature"] = opt(m.temperature);
    j["prompt_template_version"] = m.prompt_template_version;
  }
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  const auto j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw UsageError("manifest is not a JSON object");
  RunManifest m;
  const auto str = [&](const char* k, std::optional<std::string>& into) {
    if (j.contains(k) && !j[k].is_null()) into = j[k].get<std::string>();
  };
  try {
    if (j.contains("command")) m.command = j["command"].get<std::string>();
    str("dataset", m.dataset);
    str("replay_store", m.replay_store);
    str("model", m.model);
    str("out", m.out);
    str("descriptions", m.descriptions);
    str("embeddings_path", m.embeddings_path);
    str("synth", m.synth);
    str("abstracts", m.abstracts);
    m.provider = j.value("provider", m.provider);
    m.setting = j.value("setting", m.setting);
    m.seed = j.value("seed", m.seed);
    m.max_in_flight = j.value("max_in_flight", m.max_in_flight);
    if (j.contains("temperature") && !j["temperature"].is_null()) m.temperature = j["temperature"].get<double>();
    if (j.contains("subsample") && !j["subsample"].is_null()) m.subsample = j["subsample"].get<std::size_t>();
    m.v = j.value("v", m.v);
    m.t = j.value("t", m.t);
    m.rounds = j.value("rounds", m.rounds);
    m.descriptions_only = j.value("descriptions_only", m.descriptions_only);
    m.with_descriptions = j.value("with_descriptions", m.with_descriptions);
    m.detectors = j.value("detectors", m.detectors);
    m.embeddings = j.value("embeddings", m.embeddings);
    m.embedding_model = j.value("embedding_model", m.embedding_model);
    m.n_queries = j.value("n_queries", m.n_queries);
    m.no_context = j.value("no_context", m.no_context);
    m.prompt_template_version = j.value("prompt_template_version", m.prompt_template_version);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("manifest: ") + e.what());
  }
  return m;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"adlab: LLM anomaly detection benchmark runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "adlab 0.1.0");

  // Flag values land here; only flags given on the command line override
  // the manifest.
  RunManifest f;
  std::string manifest_path;
  std::string temperature_text;
  std::size_t subsample = 0;
  std::string detectors_csv;
  std::vector<std::string> report_inputs;
  std::vector<std::pair<CLI::App*, std::vector<CLI::Option*>>> registry;
  std::map<std::string, CLI::Option*> opts;

  const auto shared = [&](CLI::App* sub) {
    opts["manifest"] = sub->add_option("--manifest", manifest_path, "Run manifest (JSON)");
    opts["dataset"] = sub->add_option("--dataset", f.dataset,
                                      "Dataset directory with spec.json, train.jsonl, test.jsonl");
    opts["provider"] = sub->add_option("--provider", f.provider, "live, replay or record")
                           ->check(CLI::IsMember({"live", "replay", "record"}));
    opts["replay_store"] = sub->add_option("--replay-store", f.replay_store, "Replay store file");
    opts["model"] = sub->add_option("--model", f.model, "Model id");
    opts["setting"] = sub->add_option("--setting", f.setting, "normal-only or normal-anomaly")
                          ->check(CLI::IsMember({"normal-only", "normal-anomaly"}));
    opts["seed"] = sub->add_option("--seed", f.seed, "Seed (default 42)");
    opts["out"] = sub->add_option("--out", f.out, "Output directory");
    opts["max_in_flight"] = sub->add_option("--max-in-flight", f.max_in_flight,
                                            "Concurrent requests")->check(CLI::PositiveNumber);
  };

  auto* detect = app.add_subcommand("detect", "Zero-shot detection over the test split");
  shared(detect);
  opts["temperature"] = detect->add_option("--temperature", temperature_text, "Decoding temperature");
  opts["descriptions"] = detect->add_option("--descriptions", f.descriptions,
                                            "Category descriptions JSON to enrich the prompt");
  opts["subsample"] = detect->add_option("--subsample", subsample, "Use N random test samples");

  auto* augment = app.add_subcommand("augment", "Synthetic samples and category descriptions");
  shared(augment);
  opts["v"] = augment->add_option("--v", f.v, "Real samples per normal category");
  opts["t"] = augment->add_option("--t", f.t, "Keyword groups per category per round");
  opts["rounds"] = augment->add_option("--rounds", f.rounds, "Rounds of the default schedule (1-4)");
  opts["descriptions_only"] = augment->add_flag("--descriptions-only", f.descriptions_only,
                                                "Only generate category descriptions");
  opts["with_descriptions"] = augment->add_flag("--with-descriptions", f.with_descriptions,
                                                "Also generate category descriptions");

  auto* baselines = app.add_subcommand("baselines", "Two-step detectors with and without synth");
  shared(baselines);
  auto* bv = baselines->add_option("--v", f.v, "Real samples per normal category");
  opts["detectors"] = baselines->add_option("--detectors", detectors_csv,
                                            "Comma-separated subset of AE,ECOD,IForest,LOF");
  opts["embeddings"] = baselines->add_option("--embeddings", f.embeddings, "fixture, live or import");
  opts["embeddings_path"] = baselines->add_option("--embeddings-path", f.embeddings_path,
                                                  "Fixture directory or CSV matrix");
  opts["embedding_model"] = baselines->add_option("--embedding-model", f.embedding_model,
                                                  "Embedding model id");
  opts["synth"] = baselines->add_option("--synth", f.synth, "Synthetic samples JSONL");

  auto* select = app.add_subcommand("select", "Unsupervised model selection");
  shared(select);
  opts["n_queries"] = select->add_option("--n-queries", f.n_queries, "Queries (default 5)");
  opts["no_context"] = select->add_flag("--no-context", f.no_context,
                                        "Leave dataset and model information out of the prompt");
  opts["abstracts"] = select->add_option("--abstracts", f.abstracts, "Abstract catalog JSON");
  auto* st = select->add_option("--temperature", temperature_text, "Decoding temperature");

  auto* report = app.add_subcommand("report", "Merge run outputs into comparison tables");
  report->add_option("inputs", report_inputs, "report.json files or run directories")->required();
  auto* rout = report->add_option("--out", f.out, "Output directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (report->parsed()) {
      (void)rout;
      return cmd_report(report_inputs, f.out, out);
    }
    CLI::App* sub = detect->parsed()      ? detect
                    : augment->parsed()   ? augment
                    : baselines->parsed() ? baselines
                                          : select;
    RunManifest m;
    if (!manifest_path.empty()) {
      std::ifstream in(manifest_path);
      if (!in) throw UsageError("cannot open manifest " + manifest_path);
      std::stringstream buf;
      buf << in.rdbuf();
      m = manifest_from_json(buf.str());
    }
    m.command = sub->get_name();
    const auto given = [&](const char* name) {
      auto it = opts.find(name);
      if (it != opts.end()) {
        // Shared options are registered once per subcommand; look them up
        // on the subcommand that ran.
        for (auto* o : sub->get_options()) {
          if (o->get_name() == it->second->get_name() && o->count() > 0) return true;
        }
      }
      return false;
    };
    if (given("dataset")) m.dataset = f.dataset;
    if (given("provider")) m.provider = f.provider;
    if (given("replay_store")) m.replay_store = f.replay_store;
    if (given("model")) m.model = f.model;
    if (given("setting")) m.setting = f.setting;
    if (given("seed")) m.seed = f.seed;
    if (given("out")) m.out = f.out;
    if (given("max_in_flight")) m.max_in_flight = f.max_in_flight;
    if (given("descriptions")) m.descriptions = f.descriptions;
    if (given("subsample")) m.subsample = subsample;
    if (given("temperature") || (st->count() > 0)) {
      try {
        m.temperature = std::stod(temperature_text);
      } catch (const std::exception&) {
        throw UsageError("--temperature must be a number");
      }
    }
    if (given("v") || bv->count() > 0) m.v = f.v;
    if (given("t")) m.t = f.t;
    if (given("rounds")) m.rounds = f.rounds;
    if (given("descriptions_only")) m.descriptions_only = f.descriptions_only;
    if (given("with_descriptions")) m.with_descriptions = f.with_descriptions;
    if (given("detectors")) {
      m.detectors.clear();
      std::stringstream ss(detectors_csv);
      for (std::string d; std::getline(ss, d, ',');) {
        if (!d.empty()) m.detectors.push_back(d);
      }
    }
    if (given("embeddings")) m.embeddings = f.embeddings;
    if (given("embeddings_path")) m.embeddings_path = f.embeddings_path;
    if (given("embedding_model")) m.embedding_model = f.embedding_model;
    if (given("synth")) m.synth = f.synth;
    if (given("n_queries")) m.n_queries = f.n_queries;
    if (given("no_context")) m.no_context = f.no_context;
    if (given("abstracts")) m.abstracts = f.abstracts;
    if (m.temperature && (*m.temperature < 0.0 || *m.temperature > 2.0)) {
      throw UsageError("--temperature must lie in [0, 2]");
    }

    if (m.command == "detect") return cmd_detect(m, out);
    if (m.command == "augment") return cmd_augment(m, out);
    if (m.command == "baselines") return cmd_baselines(m, out);
    return cmd_select(m, out);
  } catch (const UsageError& e) {
    err << "adlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "adlab: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "adlab: error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace adlab::cli
