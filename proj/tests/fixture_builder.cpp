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

// Regenerates the replay stores and embedding fixtures under tests/fixtures.
//
// A scripted model stands in for the chat endpoint: it answers each prompt
// from the authored tables below, and the real pipelines run against it
// through RecordingChatProvider. Running the builder twice yields identical
// bytes, which the freshness test relies on.
//
//   fixture_builder <fixtures_dir> <out_dir>
//   fixture_builder --check <fixtures_dir>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "adlab/augment.hpp"
#include "adlab/corpus.hpp"
#include "adlab/embed.hpp"
#include "adlab/hash.hpp"
#include "adlab/llm.hpp"
#include "adlab/modelsel.hpp"
#include "adlab/random.hpp"
#include "adlab/zeroshot.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kModel = "scripted-fixture";
constexpr const char* kEmbeddingModel = "text-embedding-3-large";

// Authored anomaly scores for agnews_mini/test.jsonl, in file order.
// Negative entries mark the planted failures.
constexpr double kRepetitionLoop = -1.0;
constexpr double kMalformed = -2.0;
constexpr std::array<double, 50> kScores = {
    0.05, 0.10, 0.05, 0.92, 0.05, 0.15, 0.10, kRepetitionLoop, 0.20, 0.05,
    0.05, 0.85, 0.10, 0.05, 0.10, 0.15, 0.20, 0.05, 0.30, 0.10,
    kMalformed, 0.40, 0.15, 0.10, 0.05, 0.88, 0.35, 0.25, 0.05, 0.10,
    0.10, 0.05, 0.10, 0.05, 0.95, 0.05, 0.65, 0.10, 0.05, 0.20,
    0.15, 0.05, 0.75, 0.10, 0.70, 0.05, 0.10, 0.15, 0.10, 0.05,
};

std::string repetition_text() {
  std::string s =
      "{\"reason\": \"The text discusses a baseball game, which aligns with the Sports "
      "category. ";
  for (int i = 0; i < 12; ++i) s += "The team is playing well and the fans are happy. ";
  return s;
}

// Keyword groups per round and category. Three entries repeat an earlier
// round (two with different letter case) and are removed by dedup.
using Triple = std::array<const char*, 3>;
const std::map<std::string, std::vector<std::vector<Triple>>>& keyword_table() {
  static const std::map<std::string, std::vector<std::vector<Triple>>> table = {
      {"Sports",
       {{{"Football", "Premier League", "Transfer window"},
           {"Tennis", "Grand Slam", "Five-set final"},
           {"Basketball", "NBA playoffs", "Buzzer-beater"},
           {"Cycling", "Tour de France", "Mountain stage"},
           {"Baseball", "World Series", "Walk-off home run"}},
         {{"Golf", "Major championship", "Final-round birdie"},
           {"Athletics", "Olympic Games", "100m sprint"},
           {"football", "premier league", "transfer window"},
           {"Cricket", "Test match", "Double century"},
           {"Motorsport", "Formula One", "Pit-stop strategy"}},
         {{"Rugby", "Six Nations", "Late try"},
           {"Ice hockey", "Stanley Cup", "Overtime goal"},
           {"Boxing", "Heavyweight title", "Split decision"},
           {"Swimming", "World Championships", "Relay record"},
           {"Skiing", "World Cup circuit", "Downhill crash"}},
         {{"Marathon", "Boston Marathon", "Course record"},
           {"American football", "Super Bowl", "Two-point conversion"},
           {"Doping", "Anti-doping agency", "Out-of-competition test"},
           {"Coaching", "Managerial change", "Interim coach"},
           {"Volleyball", "Beach volleyball", "Match point"}}}},
      {"Business",
       {{{"Stock market", "Quarterly earnings", "Profit warning"},
           {"Monetary policy", "Interest rates", "Rate cut"},
           {"Energy", "Oil prices", "OPEC output quota"},
           {"Mergers", "Hostile takeover", "Tender offer"},
           {"Retail", "Holiday sales", "Same-store sales"}},
         {{"Labor market", "Jobless claims", "Seasonal adjustment"},
           {"Housing", "Mortgage rates", "Housing starts"},
           {"Aviation", "Airline industry", "Fuel surcharge"},
           {"Banking", "Bad loans", "Capital ratio"},
           {"Trade", "Trade deficit", "Import tariffs"}},
         {{"Automotive", "Vehicle recall", "Brake defect"},
           {"mergers", "hostile takeover", "tender offer"},
           {"Pharmaceuticals", "Patent dispute", "Generic drug"},
           {"Currency", "Exchange rates", "Euro strength"},
           {"Venture capital", "Initial public offering", "Share pricing"}},
         {{"Insurance", "Catastrophe claims", "Hurricane losses"},
           {"Regulation", "Antitrust review", "Consent decree"},
           {"Manufacturing", "Factory orders", "Durable goods"},
           {"Consumer spending", "Consumer confidence", "Fuel costs"},
           {"Telecommunications", "Job cuts", "Restructuring charge"}}}},
      {"Sci/Tech",
       {{{"Space exploration", "Mars rover", "Rock sample"},
           {"Computing", "Microprocessors", "Dual-core chip"},
           {"Internet", "Web search", "Desktop search tool"},
           {"Security", "Computer worms", "Instant messaging"},
           {"Biology", "Genome sequencing", "Crop fungus"}},
         {{"Open source", "Web browsers", "Popup blocker"},
           {"Astronomy", "Exoplanets", "Transit method"},
           {"Mobile devices", "Camera phones", "Megapixel sensor"},
           {"Gaming", "Handheld consoles", "Price cut"},
           {"Physics", "Quantum computing", "Qubit coherence"}},
         {{"Climate", "Ozone layer", "Antarctic ozone hole"},
           {"Robotics", "Climbing robots", "Gecko-inspired feet"},
           {"Digital music", "Online music stores", "Song downloads"},
           {"Software", "Operating systems", "Security patch"},
           {"Satellites", "Satellite radio", "Subscriber growth"}},
         {{"Materials", "Nanotubes", "Carbon nanotube transistor"},
           {"Email", "Webmail services", "Storage quota"},
           {"Optics", "Slow light", "Laser-cooled crystal"},
           {"Databases", "Open-source databases", "Vendor backing"},
           {"Open Source", "Web Browsers", "Popup Blocker"}}}},
  };
  return table;
}

std::string after(const std::string& s, const std::string& marker) {
  auto p = s.find(marker);
  if (p == std::string::npos) return {};
  p += marker.size();
  return s.substr(p, s.find('\n', p) - p);
}

std::string round_category_reason(const std::string& category) {
  return "The text sample focuses on " + category +
         " topics, so it most closely aligns with the " + category + " category.";
}

// The scripted chat model.
class ScriptedModel : public adlab::ChatProvider {
 public:
  ScriptedModel(std::vector<adlab::Sample> detect_test, std::map<std::string, std::vector<std::string>> ums)
      : detect_test_(std::move(detect_test)), ums_(std::move(ums)) {}

 protected:
  adlab::ChatOutcome do_complete(const adlab::ChatRequest& req) override {
    const auto& p = req.prompt;
    adlab::ChatOutcome out;
    if (p.rfind("You are an intelligent and professional assistant that detects anomalies", 0) == 0) {
      out.text = detection(p);
    } else if (p.rfind("You are an intelligent and professional assistant that generates groups", 0) == 0) {
      out.text = keywords(req);
    } else if (p.rfind("You are an intelligent and professional assistant that generates a synthetic", 0) == 0) {
      out.text = sample(p);
    } else if (p.rfind("You are an intelligent and professional assistant that generates descriptions", 0) == 0) {
      out.text = descriptions();
    } else if (p.rfind("You are an expert in model selection", 0) == 0) {
      out.text = selection(req);
    } else {
      throw adlab::Error("scripted model: unrecognized prompt");
    }
    return out;
  }

 private:
  std::string detection(const std::string& p) {
    const std::string marker = "Text sample:\n\"";
    auto b = p.find(marker);
    if (b == std::string::npos) throw adlab::Error("scripted model: no text sample");
    b += marker.size();
    const auto e = p.find("\"\n", b);
    const std::string text = p.substr(b, e - b);
    for (std::size_t i = 0; i < detect_test_.size(); ++i) {
      if (detect_test_[i].text != text) continue;
      const double s = kScores[i];
      if (s == kRepetitionLoop) return repetition_text();
      if (s == kMalformed) {
        return "This headline is about an online music service, so it fits Sci/Tech and is "
               "not an anomaly. Score: 0.1";
      }
      const auto& cat = detect_test_[i].category;
      const std::string reason =
          cat == "World" ? "The text sample reports on international affairs, which does not "
                           "align with Sports, Business or Sci/Tech."
                         : round_category_reason(cat);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", s);
      std::string body = "{\n  \"reason\": \"" + reason + "\",\n  \"anomaly_score\": " + buf + "\n}";
      // Every fifth answer arrives inside a markdown fence.
      if (i % 5 == 2) body = "```json\n" + body + "\n```";
      return body;
    }
    throw adlab::Error("scripted model: unknown test text");
  }

  std::string keywords(const adlab::ChatRequest& req) {
    const double t = req.temperature.value_or(1.0);
    const int round = t > 0.95 ? 0 : t > 0.85 ? 1 : t > 0.75 ? 2 : 3;
    json j = json::object();
    for (const auto& [category, rounds] : keyword_table()) {
      json groups = json::array();
      for (const auto& g : rounds[static_cast<std::size_t>(round)]) {
        groups.push_back({g[0], g[1], g[2]});
      }
      j[category] = groups;
    }
    return j.dump(2);
  }

  std::string sample(const std::string& p) {
    const auto broad = after(p, "- Broad: ");
    const auto mid = after(p, "- Intermediate: ");
    const auto fine = after(p, "- Fine-grained: ");
    const std::string text = broad + " watchers turned their attention to " + mid +
                             " this week, as a story about " + fine +
                             " drew wide coverage and fresh debate among analysts.";
    // Alternate between a bare string and a JSON string literal.
    if (++sample_calls_ % 2 == 0) return json(text).dump();
    return text;
  }

  static std::string descriptions() {
    json j = {
        {"Sports", "Sports news covers competitive athletic events and the people involved in "
                   "them, such as match results, transfers, injuries and championships, etc."},
        {"Business", "Business news reports on companies, markets and the economy, including "
                     "earnings, mergers, interest rates and trade, and so on."},
        {"Sci/Tech", "Science and technology news describes research findings, space missions, "
                     "computing, the internet and consumer electronics, etc."},
        {"World", "World news covers international politics, conflicts, diplomacy and natural "
                  "disasters across countries, and so on."}};
    return j.dump(2);
  }

  std::string selection(const adlab::ChatRequest& req) {
    std::string name = after(req.prompt, "- Dataset Name: ");
    if (name.empty()) name = "(no context)";
    const auto it = ums_.find(name);
    if (it == ums_.end()) throw adlab::Error("scripted model: no selections for " + name);
    const auto i = static_cast<std::size_t>(req.seed.value_or(42) - 42);
    const auto& choice = it->second.at(i);
    json j = {{"reason", choice + " pairs strong general-purpose embeddings with a detector "
                                  "that suits high-dimensional data without labels."},
              {"choice", choice}};
    return j.dump();
  }

  std::vector<adlab::Sample> detect_test_;
  std::map<std::string, std::vector<std::string>> ums_;
  int sample_calls_ = 0;
};

std::map<std::string, std::vector<std::string>> ums_choices() {
  const std::string L = "OpenAI+LUNAR", E = "OpenAI+ECOD";
  return {
      {"AG News", {L, L, E, L, E}},
      {"BBC News", {L, E, L, "OpenAI+DeepSVDD", L}},
      {"IMDB Reviews", {E, L, E, L, "BERT+LUNAR"}},
      {"N24 News", {L, E, L, "OpenAI+iForest", E}},
      {"SMS Spam", {L, E, "OpenAI+DeepSVDD", L, L}},
      {"(no context)", {E, E, "OpenAI+DeepSVDD", E, L}},
  };
}

adlab::Dataset load_dir(const fs::path& dir) {
  const auto spec = adlab::load_dataset_spec(dir / "spec.json");
  return adlab::load_dataset(dir / "train.jsonl", dir / "test.jsonl", spec);
}

std::uint64_t text_seed(const std::string& text) {
  const auto d = adlab::sha256(text);
  std::uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s = (s << 8) | d[static_cast<std::size_t>(i)];
  return s;
}

// Category centroid on its own axis plus seeded Gaussian noise.
adlab::EmbeddingVector synthetic_embedding(const std::string& text, std::size_t axis) {
  constexpr std::size_t kDim = 8;
  adlab::Rng rng(text_seed(text));
  adlab::EmbeddingVector v;
  v.values.resize(kDim);
  for (auto& x : v.values) x = 0.35 * rng.normal();
  v.values[axis % kDim] += 2.0;
  return v;
}

void build(const fs::path& fixtures, const fs::path& out) {
  fs::create_directories(out / "replay");
  fs::create_directories(out / "embeddings");
  for (const char* f : {"detect.jsonl", "synth.jsonl", "ums.jsonl"}) fs::remove(out / "replay" / f);
  fs::remove(out / "embeddings" / "embeddings.tsv");

  const auto agnews = load_dir(fixtures / "agnews_mini");
  auto scripted = std::make_shared<ScriptedModel>(agnews.test, ums_choices());

  {
    auto store = std::make_shared<adlab::ReplayStore>(out / "replay" / "detect.jsonl");
    adlab::RecordingChatProvider rec(scripted, store);
    for (auto setting : {adlab::DetectionSetting::kNormalOnly, adlab::DetectionSetting::kNormalPlusAnomaly}) {
      adlab::ZeroShotConfig config;
      config.model_id = kModel;
      config.max_in_flight = 1;
      (void)adlab::run_zero_shot(agnews, adlab::PromptContext::from_spec(agnews.spec, setting),
                                 setting, rec, config);
    }
  }

  std::vector<adlab::SynthSample> synth;
  {
    auto store = std::make_shared<adlab::ReplayStore>(out / "replay" / "synth.jsonl");
    adlab::RecordingChatProvider rec(scripted, store);
    adlab::SynthRunConfig config;
    config.model_id = kModel;
    config.max_in_flight = 1;
    synth = adlab::run_synth_rounds(agnews.spec, 5, adlab::default_round_schedule(4), rec, config)
                .samples;
    adlab::ChatRequest req;
    req.prompt = adlab::build_description_prompt(agnews.spec);
    req.temperature = adlab::kDescriptionTemperature;
    req.seed = 42;
    req.max_tokens = adlab::kKeywordMaxTokens;
    req.model_id = kModel;
    (void)rec.complete(req);
  }

  {
    auto store = std::make_shared<adlab::ReplayStore>(out / "replay" / "ums.jsonl");
    adlab::RecordingChatProvider rec(scripted, store);
    const auto abstracts = adlab::AbstractCatalog::bundled();
    adlab::SelectionConfig config;
    config.model_id = kModel;
    std::vector<adlab::Dataset> sets = {agnews};
    for (const char* d : {"bbc_news", "imdb_reviews", "n24_news", "sms_spam"}) {
      sets.push_back(load_dir(fixtures / "ums" / d));
    }
    for (const auto& ds : sets) {
      const auto prompt = adlab::build_ums_prompt(adlab::make_ums_context(ds, abstracts, 42));
      (void)adlab::run_model_selection(prompt, rec, 5, config);
    }
    adlab::UmsContext empty;
    empty.abstracts = abstracts;
    (void)adlab::run_model_selection(adlab::build_ums_prompt(empty, true), rec, 5, config);
  }

  std::vector<std::string> texts;
  std::vector<adlab::EmbeddingVector> vectors;
  std::map<std::string, std::size_t> axis;
  for (const auto& c : agnews.spec.normal_categories) axis.emplace(c, axis.size());
  axis.emplace(agnews.spec.anomaly_category, axis.size());
  const auto add = [&](const std::string& text, const std::string& category) {
    if (std::find(texts.begin(), texts.end(), text) != texts.end()) return;
    texts.push_back(text);
    vectors.push_back(synthetic_embedding(text, axis.at(category)));
  };
  for (const auto& s : agnews.train) add(s.text, s.category);
  for (const auto& s : synth) add(s.text, s.category);
  for (const auto& s : agnews.test) add(s.text, s.category);
  adlab::FixtureEmbeddingProvider::write_fixture(out / "embeddings", kEmbeddingModel, texts, vectors);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  try {
    if (argc == 3 && std::string(argv[1]) == "--check") {
      const fs::path fixtures = argv[2];
      const fs::path tmp = fs::temp_directory_path() /
                           ("adlab_fixture_check_" + std::to_string(::getpid()));
      fs::remove_all(tmp);
      build(fixtures, tmp);
      int stale = 0;
      for (const char* f : {"replay/detect.jsonl", "replay/synth.jsonl", "replay/ums.jsonl",
                            "embeddings/embeddings.tsv"}) {
        if (slurp(tmp / f) != slurp(fixtures / f)) {
          std::cerr << "stale fixture: " << f << "\n";
          ++stale;
        }
      }
      fs::remove_all(tmp);
      if (stale == 0) std::cout << "fixtures are up to date\n";
      return stale == 0 ? 0 : 1;
    }
    if (argc != 3) {
      std::cerr << "usage: fixture_builder <fixtures_dir> <out_dir>\n"
                   "       fixture_builder --check <fixtures_dir>\n";
      return 2;
    }
    build(argv[1], argv[2]);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "fixture_builder: " << e.what() << "\n";
    return 1;
  }
}
