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

#include <gtest/gtest.h>

#include <map>
#include <mutex>

#include "adlab/augment.hpp"
#include "adlab/corpus.hpp"
#include "adlab/error.hpp"
#include "adlab/zeroshot.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace adlab {
namespace {

using nlohmann::json;

Dataset agnews() {
  const auto dir = testing::fixtures_dir() / "agnews_mini";
  return load_dataset(dir / "train.jsonl", dir / "test.jsonl", load_dataset_spec(dir / "spec.json"));
}

DatasetSpec two_categories() {
  DatasetSpec s;
  s.name = "Toy";
  s.original_task = "toy classification";
  s.normal_categories = {"Cats", "Dogs"};
  s.anomaly_category = "Birds";
  return s;
}

TEST(RoundSchedule, FourRounds) {
  const auto r = default_round_schedule();
  ASSERT_EQ(r.size(), 4u);
  const std::vector<std::pair<double, std::int64_t>> want = {{1.0, 42}, {0.9, 43}, {0.8, 44}, {0.7, 45}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(r[i].temperature, want[i].first);
    EXPECT_EQ(r[i].seed, want[i].second);
  }
  EXPECT_EQ(r[0].suffix, "This is the first time you do this task, good luck!");
  EXPECT_EQ(r[3].suffix, "You have done this task three times, you are now an expert at it.");
  EXPECT_EQ(default_round_schedule(2).size(), 2u);
  EXPECT_THROW(default_round_schedule(0), InvalidArgument);
  EXPECT_THROW(default_round_schedule(5), InvalidArgument);
}

TEST(KeywordPrompt, SuffixIsFinalLine) {
  const std::string suffix = "This is the first time you do this task, good luck!";
  const auto p = build_keyword_prompt(two_categories(), 2, suffix);
  EXPECT_EQ(p.substr(p.size() - suffix.size() - 1), suffix + "\n");
  EXPECT_NE(p.find("Cats\nDogs\n"), std::string::npos);
  EXPECT_EQ(p.find("Birds"), std::string::npos);
}

TEST(ParseKeywords, WellFormed) {
  const auto r = parse_keyword_groups(
      R"({"Cats": [["pets", "house cats", "tabby"], ["wild", "big cats", "lynx"]],
          "Dogs": [["pets", "breeds", "beagle"], ["work", "herding", "collie"]]})",
      two_categories(), 2);
  ASSERT_EQ(r.groups.size(), 4u);
  EXPECT_EQ(r.groups[0], (KeywordGroup{"pets", "house cats", "tabby", "Cats"}));
  EXPECT_EQ(r.groups[3], (KeywordGroup{"work", "herding", "collie", "Dogs"}));
  EXPECT_TRUE(r.shortfall.empty());
}

std::string error_of(const std::string& text, KeywordParseMode mode = KeywordParseMode::kStrict) {
  try {
    parse_keyword_groups(text, two_categories(), 2, mode);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseKeywords, Errors) {
  const auto arity = error_of(R"({"Cats": [["a", "b", "c"], ["a", "b"]], "Dogs": [["a","b","c"],["d","e","f"]]})");
  EXPECT_NE(arity.find("keyword group 1"), std::string::npos);
  EXPECT_NE(arity.find("'Cats'"), std::string::npos);
  EXPECT_NE(error_of(R"({"Cats": [["a","b","c"],["d","e","f"]]})").find("missing category 'Dogs'"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"Cats": [["a","b","c"]], "Dogs": [["a","b","c"],["d","e","f"]]})").find("expected 2"),
            std::string::npos);
  EXPECT_FALSE(error_of(R"({"Cats": [["a"," ","c"],["d","e","f"]], "Dogs": [["a","b","c"],["d","e","f"]]})").empty());
  EXPECT_THROW(parse_keyword_groups("no json", two_categories(), 2), LlmError);
}

TEST(ParseKeywords, LenientRecordsShortfall) {
  const auto r = parse_keyword_groups(R"({"Cats": [["a","b","c"]], "Dogs": [["a","b","c"],["d","e","f"],["g","h","i"]]})",
                                      two_categories(), 2, KeywordParseMode::kLenient);
  EXPECT_EQ(r.groups.size(), 3u);
  EXPECT_EQ(r.shortfall, (std::map<std::string, std::size_t>{{"Cats", 1}}));
}

TEST(Dedup, FirstOccurrenceWinsAndCaseFolds) {
  const std::vector<KeywordGroup> in = {
      {"Economy", "Stock market", "Dividend yields", "Business"},
      {"sports", "tennis", "grand slam", "Sports"},
      {" economy", "STOCK MARKET", "dividend yields ", "Business"},
      {"economy", "stock market", "dividend yields", "Sci/Tech"},
  };
  const auto out = dedup_keyword_groups(in);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0], in[0]);
  EXPECT_EQ(out[1], in[1]);
  EXPECT_EQ(out[2], in[3]);
}

TEST(Dedup, TwoHundredWithFifteenRepeats) {
  std::vector<KeywordGroup> in;
  for (int i = 0; i < 185; ++i) in.push_back({"b" + std::to_string(i), "m", "f", "C"});
  for (int i = 0; i < 15; ++i) in.push_back({"B" + std::to_string(i * 7), "M", "F ", "C"});
  EXPECT_EQ(dedup_keyword_groups(in).size(), 185u);
}

TEST(SampleResponse, Unwrapping) {
  EXPECT_EQ(parse_sample_response("\"A \\\"quoted\\\" story.\""), "A \"quoted\" story.");
  EXPECT_EQ(parse_sample_response("{\"sample\": \"Inside an object.\"}"), "Inside an object.");
  EXPECT_EQ(parse_sample_response("  Plain text answer.\n"), "Plain text answer.");
  EXPECT_EQ(parse_sample_response("{\"a\": \"x\", \"b\": \"y\"}"), "{\"a\": \"x\", \"b\": \"y\"}");
}

TEST(SamplePrompt, Slots) {
  const auto p = build_sample_prompt({"economy", "stock market", "dividend yields", "Cats"}, two_categories());
  EXPECT_NE(p.find("- Broad: economy\n- Intermediate: stock market\n- Fine-grained: dividend yields\n"),
            std::string::npos);
  EXPECT_NE(p.find("The category is \"Cats\""), std::string::npos);
}

// Keyword answers depend on the round temperature; samples echo the keywords.
class ToyModel : public ChatProvider {
 public:
  std::vector<std::pair<double, std::int64_t>> keyword_calls;

 protected:
  ChatOutcome do_complete(const ChatRequest& req) override {
    if (req.prompt.find("generates groups of keywords") != std::string::npos) {
      std::lock_guard lock(mu_);
      keyword_calls.emplace_back(*req.temperature, *req.seed);
      const bool first = *req.temperature == 1.0;
      json j = {{"Cats", {{"pets", "house cats", "tabby"}, {"wild", "big cats", first ? "lynx" : "ocelot"}}},
                {"Dogs", {{"pets", "breeds", "beagle"}, {"work", "herding", "collie"}}}};
      return {j.dump(), FinishReason::kStop, 0};
    }
    const auto b = req.prompt.find("- Fine-grained: ") + 16;
    return {"\"A story about " + req.prompt.substr(b, req.prompt.find('\n', b) - b) + ".\"", FinishReason::kStop,
            0};
  }

 private:
  std::mutex mu_;
};

SynthRunConfig toy_config() {
  SynthRunConfig c;
  c.model_id = "toy";
  c.max_in_flight = 2;
  return c;
}

TEST(SynthRounds, OneRound) {
  ToyModel m;
  const auto r = run_synth_rounds(two_categories(), 2, default_round_schedule(1), m, toy_config());
  ASSERT_EQ(r.samples.size(), 4u);
  EXPECT_EQ(m.calls(), 5u);
  EXPECT_EQ(r.samples[0].text, "A story about tabby.");
  EXPECT_EQ(r.samples[0].id, "synth:1:Cats:0");
  EXPECT_EQ(r.samples[3].category, "Dogs");
  for (const auto& s : r.samples) EXPECT_EQ(s.prompt_hash.size(), 64u);
}

TEST(SynthRounds, CrossRoundDedup) {
  ToyModel m;
  const auto r = run_synth_rounds(two_categories(), 2, default_round_schedule(4), m, toy_config());
  // Round 1 gives 4 groups, round 2 adds "ocelot", rounds 3 and 4 add nothing.
  ASSERT_EQ(r.rounds.size(), 4u);
  EXPECT_EQ(r.samples.size(), 5u);
  EXPECT_EQ(r.rounds[0].samples, 4u);
  EXPECT_EQ(r.rounds[1].samples, 1u);
  EXPECT_EQ(r.rounds[1].duplicates_removed, 3u);
  EXPECT_EQ(r.rounds[3].duplicates_removed, 4u);
  EXPECT_EQ(m.calls(), 4u + 5u);
  std::sort(m.keyword_calls.begin(), m.keyword_calls.end(), std::greater<>());
  EXPECT_EQ(m.keyword_calls,
            (std::vector<std::pair<double, std::int64_t>>{{1.0, 42}, {0.9, 43}, {0.8, 44}, {0.7, 45}}));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.rounds[i].round_index, static_cast<int>(i + 1));
    EXPECT_EQ(r.rounds[i].seed, 42 + static_cast<std::int64_t>(i));
  }
}

TEST(SynthRounds, ZeroGroupsIssuesNothing) {
  ToyModel m;
  const auto r = run_synth_rounds(two_categories(), 0, default_round_schedule(4), m, toy_config());
  EXPECT_TRUE(r.samples.empty());
  EXPECT_EQ(m.calls(), 0u);
}

TEST(SynthRounds, ResumeReusesJournaledSamples) {
  testing::TempDir tmp;
  auto c = toy_config();
  c.journal = tmp / "synth.jsonl";
  ToyModel first;
  const auto a = run_synth_rounds(two_categories(), 2, default_round_schedule(2), first, c);
  ToyModel second;
  const auto b = run_synth_rounds(two_categories(), 2, default_round_schedule(2), second, c);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(second.calls(), 2u);
}

TEST(SynthRounds, FixtureReplayAccounting) {
  const auto d = agnews();
  ReplayChatProvider p(std::make_shared<ReplayStore>(testing::fixtures_dir() / "replay" / "synth.jsonl"));
  SynthRunConfig c;
  c.model_id = "scripted-fixture";
  const auto r = run_synth_rounds(d.spec, 5, default_round_schedule(4), p, c);
  // 4 rounds x 3 categories x 5 groups, minus the three planted repeats.
  EXPECT_EQ(r.samples.size(), 57u);
  std::vector<std::size_t> per_round, dups;
  for (const auto& rr : r.rounds) {
    per_round.push_back(rr.samples);
    dups.push_back(rr.duplicates_removed);
  }
  EXPECT_EQ(per_round, (std::vector<std::size_t>{15, 14, 14, 14}));
  EXPECT_EQ(dups, (std::vector<std::size_t>{0, 1, 1, 1}));

  const auto small = sample_small_train(d, 5, 42);
  const auto da = build_dataset_with_synth(small, r.samples);
  EXPECT_EQ(small.train.size(), 15u);
  EXPECT_EQ(da.train.size(), 72u);
  EXPECT_EQ(da.test, d.test);
  for (std::size_t i = 15; i < da.train.size(); ++i) EXPECT_EQ(da.train[i].label, kNormal);
}

TEST(SynthFiles, SamplesAndProvenance) {
  testing::TempDir tmp;
  ToyModel m;
  const auto r = run_synth_rounds(two_categories(), 2, default_round_schedule(1), m, toy_config());
  write_synth_samples(tmp / "synth.jsonl", r.samples);
  const auto back = read_samples_jsonl(tmp / "synth.jsonl", two_categories(), true, "x:");
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back[1].text, r.samples[1].text);
  EXPECT_EQ(back[1].id, r.samples[1].id);
  const auto prov = testing::read_file(tmp / "synth.jsonl.provenance.jsonl");
  const auto first = json::parse(prov.substr(0, prov.find('\n')));
  EXPECT_EQ(first["id"], "synth:1:Cats:0");
  EXPECT_EQ(first["round"], 1);
  EXPECT_EQ(first["prompt_hash"], r.samples[0].prompt_hash);
}

TEST(Descriptions, ParseAndEnrich) {
  const auto spec = two_categories();
  const auto ds = parse_descriptions(
      R"(Here you go: {"Birds": "Feathered.", "Cats": "Felines, etc.", "Dogs": "Canines, and so on."})", spec);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds[0], (CategoryDescription{"Cats", "Felines, etc."}));
  EXPECT_EQ(ds[2], (CategoryDescription{"Birds", "Feathered."}));
  EXPECT_THROW(parse_descriptions(R"({"Cats": "x", "Dogs": "y"})", spec), DataError);
  EXPECT_THROW(parse_descriptions(R"({"Cats": "x", "Dogs": "", "Birds": "z"})", spec), DataError);
  EXPECT_THROW(parse_descriptions("nothing", spec), LlmError);

  const auto only = enrich_context(PromptContext::from_spec(spec, DetectionSetting::kNormalOnly), ds);
  EXPECT_EQ(only.normal[1].description, "Canines, and so on.");
  EXPECT_FALSE(only.anomaly);
  const auto both = enrich_context(PromptContext::from_spec(spec, DetectionSetting::kNormalPlusAnomaly), ds);
  EXPECT_EQ(both.anomaly->description, "Feathered.");
  EXPECT_THROW(enrich_context(PromptContext::from_spec(spec, DetectionSetting::kNormalPlusAnomaly),
                              {ds[0], ds[1]}),
               InvalidArgument);

  testing::TempDir tmp;
  write_descriptions_json(tmp / "d.json", ds);
  EXPECT_EQ(read_descriptions_json(tmp / "d.json", spec), ds);
}

TEST(Descriptions, FixtureReplay) {
  const auto d = agnews();
  ReplayChatProvider p(std::make_shared<ReplayStore>(testing::fixtures_dir() / "replay" / "synth.jsonl"));
  ChatRequest req;
  req.prompt = build_description_prompt(d.spec);
  req.temperature = kDescriptionTemperature;
  req.seed = 42;
  req.max_tokens = kKeywordMaxTokens;
  req.model_id = "scripted-fixture";
  const auto ds = parse_descriptions(p.complete(req).text, d.spec);
  EXPECT_EQ(ds.size(), 4u);
  EXPECT_EQ(ds.back().category, "World");
}

}  // namespace
}  // namespace adlab
