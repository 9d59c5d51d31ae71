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

#include "adlab/augment.hpp"

#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "json_extract.hpp"
#include "jsonl_journal.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace adlab {

using nlohmann::json;

std::vector<RoundConfig> default_round_schedule(int rounds) {
  static const RoundConfig kSchedule[] = {
      {1.0, 42, "This is the first time you do this task, good luck!"},
      {0.9, 43, "You've completed this task before, and you're improving at it."},
      {0.8, 44, "After doing this task twice, you have a better understanding of it."},
      {0.7, 45, "You have done this task three times, you are now an expert at it."},
  };
  if (rounds < 1 || rounds > 4) {
    throw InvalidArgument("the default schedule has 1 to 4 rounds, got " + std::to_string(rounds));
  }
  return {std::begin(kSchedule), std::begin(kSchedule) + rounds};
}

KeywordParseResult parse_keyword_groups(const std::string& text, const DatasetSpec& spec,
                                        std::size_t t, KeywordParseMode mode) {
  auto obj = detail::extract_first_json_object(text);
  if (!obj) throw LlmError(FailureKind::kMalformedOutput, "no JSON object in keyword response");
  KeywordParseResult out;
  for (const auto& category : spec.normal_categories) {
    if (!obj->contains(category)) {
      throw DataError("keyword response is missing category '" + category + "'");
    }
    const auto& list = (*obj)[category];
    if (!list.is_array()) {
      throw DataError("keyword groups for '" + category + "' are not a list");
    }
    std::size_t n = list.size();
    if (mode == KeywordParseMode::kStrict && n != t) {
      throw DataError("category '" + category + "' has " + std::to_string(n) +
                      " keyword groups, expected " + std::to_string(t));
    }
    if (n < t) out.shortfall[category] = t - n;
    n = std::min(n, t);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& g = list[i];
      const bool ok = g.is_array() && g.size() == 3 &&
                      std::all_of(g.begin(), g.end(), [](const json& k) {
                        return k.is_string() && !text::trim(k.get<std::string>()).empty();
                      });
      if (!ok) {
        throw DataError("keyword group " + std::to_string(i) + " of category '" + category +
                        "' must hold exactly three non-empty keywords, got " + g.dump());
      }
      out.groups.push_back({g[0].get<std::string>(), g[1].get<std::string>(),
                            g[2].get<std::string>(), category});
    }
  }
  return out;
}

namespace {

std::string dedup_key(const KeywordGroup& g) {
  std::string k = text::fold(g.broad);
  k += '\0';
  k += text::fold(g.intermediate);
  k += '\0';
  k += text::fold(g.fine);
  k += '\0';
  k += g.category;
  return k;
}

void note(const SynthRunConfig& config, const std::string& msg) {
  if (config.log) config.log(msg);
}

}  // namespace

std::vector<KeywordGroup> dedup_keyword_groups(const std::vector<KeywordGroup>& groups) {
  std::set<std::string> seen;
  std::vector<KeywordGroup> out;
  for (const auto& g : groups) {
    if (seen.insert(dedup_key(g)).second) out.push_back(g);
  }
  return out;
}

std::string parse_sample_response(const std::string& text) {
  const std::string trimmed(text::trim(text));
  if (!trimmed.empty() && trimmed.front() == '"') {
    auto j = json::parse(trimmed, nullptr, false);
    if (!j.is_discarded() && j.is_string()) return std::string(text::trim(j.get<std::string>()));
  }
  if (!trimmed.empty() && trimmed.front() == '{') {
    auto obj = detail::extract_first_json_object(trimmed);
    if (obj && obj->size() == 1 && obj->begin()->is_string()) {
      return std::string(text::trim(obj->begin()->get<std::string>()));
    }
  }
  return trimmed;
}

SynthRunResult run_synth_rounds(const DatasetSpec& spec, std::size_t t,
                                const std::vector<RoundConfig>& rounds, ChatProvider& provider,
                                const SynthRunConfig& config) {
  validate_spec(spec);
  if (rounds.empty()) throw InvalidArgument("run_synth_rounds needs at least one round");
  if (config.model_id.empty()) throw InvalidArgument("run_synth_rounds needs a model id");
  SynthRunResult result;
  std::optional<detail::JsonlJournal> journal;
  if (config.journal) journal.emplace(*config.journal);
  std::set<std::string> seen;

  for (std::size_t r = 0; r < rounds.size(); ++r) {
    const auto& round = rounds[r];
    RoundReport report;
    report.round_index = static_cast<int>(r + 1);
    report.temperature = round.temperature;
    report.seed = round.seed;
    if (t == 0) {
      result.rounds.push_back(report);
      continue;
    }

    ChatRequest kw;
    kw.prompt = build_keyword_prompt(spec, t, round.suffix);
    kw.temperature = round.temperature;
    kw.seed = round.seed;
    kw.max_tokens = config.keyword_max_tokens;
    kw.model_id = config.model_id;
    const auto parsed = parse_keyword_groups(provider.complete(kw).text, spec, t, config.parse_mode);
    for (const auto& [category, missing] : parsed.shortfall) {
      note(config, "round " + std::to_string(report.round_index) + ": category '" + category +
                       "' returned " + std::to_string(t - missing) + " of " + std::to_string(t) +
                       " keyword groups");
    }
    report.parsed_groups = parsed.groups.size();

    std::vector<KeywordGroup> fresh;
    for (const auto& g : parsed.groups) {
      if (seen.insert(dedup_key(g)).second) fresh.push_back(g);
    }
    report.duplicates_removed = report.parsed_groups - fresh.size();

    std::vector<SynthSample> samples(fresh.size());
    std::vector<ChatRequest> requests(fresh.size());
    std::map<std::string, std::size_t> per_category;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      auto& s = samples[i];
      s.category = fresh[i].category;
      s.keywords = fresh[i];
      s.round_index = report.round_index;
      s.id = "synth:" + std::to_string(report.round_index) + ":" + s.category + ":" +
             std::to_string(per_category[s.category]++);
      auto& req = requests[i];
      req.prompt = build_sample_prompt(fresh[i], spec);
      req.temperature = round.temperature;
      req.seed = round.seed;
      req.max_tokens = config.sample_max_tokens;
      req.model_id = config.model_id;
      s.prompt_hash = request_key(req);
      if (journal) {
        auto prior = journal->get(s.id);
        if (prior && prior->value("prompt_hash", "") == s.prompt_hash) {
          s.text = prior->at("text").get<std::string>();
          continue;
        }
      }
      pending.push_back(i);
    }

    std::mutex mu;
    detail::bounded_parallel_for(pending.size(), config.max_in_flight, [&](std::size_t k) {
      const std::size_t i = pending[k];
      auto outcome = provider.complete(requests[i]);
      auto text = parse_sample_response(outcome.text);
      if (text.empty()) {
        throw LlmError(FailureKind::kMalformedOutput, "empty synthetic sample for " + samples[i].id);
      }
      std::lock_guard lock(mu);
      samples[i].text = std::move(text);
      if (journal) {
        journal->append({{"id", samples[i].id},
                         {"prompt_hash", samples[i].prompt_hash},
                         {"text", samples[i].text}});
      }
    });

    report.samples = samples.size();
    result.rounds.push_back(report);
    for (auto& s : samples) result.samples.push_back(std::move(s));
  }
  return result;
}

Dataset build_dataset_with_synth(const Dataset& small_train,
                                 const std::vector<SynthSample>& synth) {
  Dataset out = small_train;
  std::set<std::string> ids;
  for (const auto& s : out.train) ids.insert(s.id);
  for (const auto& s : synth) {
    if (!out.spec.is_normal_category(s.category)) {
      throw InvalidArgument("synthetic sample " + s.id + " has category '" + s.category +
                            "', which is not a normal category of " + out.spec.name);
    }
    if (text::trim(s.text).empty()) throw InvalidArgument("synthetic sample " + s.id + " is empty");
    if (!ids.insert(s.id).second) throw InvalidArgument("duplicate sample id " + s.id);
    out.train.push_back({s.id, s.text, s.category, kNormal});
  }
  return out;
}

void write_synth_samples(const std::filesystem::path& path, const std::vector<SynthSample>& synth) {
  std::vector<Sample> rows;
  rows.reserve(synth.size());
  for (const auto& s : synth) rows.push_back({s.id, s.text, s.category, kNormal});
  write_samples_jsonl(path, rows);
  auto sidecar = path;
  sidecar += ".provenance.jsonl";
  std::ofstream out(sidecar, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + sidecar.string());
  for (const auto& s : synth) {
    json j = {{"id", s.id},
              {"round", s.round_index},
              {"category", s.category},
              {"keywords", {s.keywords.broad, s.keywords.intermediate, s.keywords.fine}},
              {"prompt_hash", s.prompt_hash}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + sidecar.string());
}

// ---------------------------------------------------------------------------

namespace {

std::vector<CategoryDescription> descriptions_from(const json& obj, const DatasetSpec& spec) {
  std::vector<std::string> wanted = spec.normal_categories;
  wanted.push_back(spec.anomaly_category);
  std::vector<CategoryDescription> out;
  for (const auto& c : wanted) {
    if (!obj.contains(c)) throw DataError("description for category '" + c + "' is missing");
    const auto& v = obj[c];
    if (!v.is_string() || text::trim(v.get<std::string>()).empty()) {
      throw DataError("description for category '" + c + "' is not a non-empty string");
    }
    out.push_back({c, v.get<std::string>()});
  }
  return out;
}

}  // namespace

std::vector<CategoryDescription> parse_descriptions(const std::string& text,
                                                    const DatasetSpec& spec) {
  auto obj = detail::extract_first_json_object(text);
  if (!obj) throw LlmError(FailureKind::kMalformedOutput, "no JSON object in description response");
  return descriptions_from(*obj, spec);
}

std::vector<CategoryDescription> read_descriptions_json(const std::filesystem::path& path,
                                                        const DatasetSpec& spec) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError(path.string() + ": not a JSON object");
  return descriptions_from(j, spec);
}

void write_descriptions_json(const std::filesystem::path& path,
                             const std::vector<CategoryDescription>& descriptions) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& d : descriptions) j[d.category] = d.text;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

PromptContext enrich_context(const PromptContext& ctx,
                             const std::vector<CategoryDescription>& descriptions) {
  if (descriptions.empty()) throw InvalidArgument("enrich_context: no descriptions given");
  std::map<std::string, std::string> by_name;
  for (const auto& d : descriptions) by_name[d.category] = d.text;
  const auto lookup = [&](const std::string& name) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw InvalidArgument("no description for category '" + name + "'");
    return it->second;
  };
  PromptContext out = ctx;
  for (auto& e : out.normal) e.description = lookup(e.name);
  if (out.anomaly) out.anomaly->description = lookup(out.anomaly->name);
  return out;
}

}  // namespace adlab
