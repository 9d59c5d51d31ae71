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

#include <cmath>
#include <set>

#include "adlab/corpus.hpp"
#include "adlab/error.hpp"
#include "test_util.hpp"
#include "text.hpp"

namespace adlab {
namespace {

using testing::TempDir;
using testing::write_file;

DatasetSpec ag_spec() {
  DatasetSpec s;
  s.name = "AG News";
  s.original_task = "AG news topics classification";
  s.normal_categories = {"Sports", "Business", "Sci/Tech"};
  s.anomaly_category = "World";
  return s;
}

TEST(Spec, ValidationRejectsBrokenSpecs) {
  EXPECT_NO_THROW(validate_spec(ag_spec()));
  auto s = ag_spec();
  s.name.clear();
  EXPECT_THROW(validate_spec(s), InvalidArgument);
  s = ag_spec();
  s.normal_categories.clear();
  EXPECT_THROW(validate_spec(s), InvalidArgument);
  s = ag_spec();
  s.normal_categories.push_back("Sports");
  EXPECT_THROW(validate_spec(s), InvalidArgument);
  s = ag_spec();
  s.anomaly_category = "Business";
  EXPECT_THROW(validate_spec(s), InvalidArgument);
  s = ag_spec();
  s.anomaly_category.clear();
  EXPECT_THROW(validate_spec(s), InvalidArgument);
}

TEST(Spec, LoadsFixture) {
  const auto spec = load_dataset_spec(testing::fixtures_dir() / "agnews_mini" / "spec.json");
  EXPECT_EQ(spec.name, "AG News");
  EXPECT_EQ(spec.normal_categories, (std::vector<std::string>{"Sports", "Business", "Sci/Tech"}));
  EXPECT_EQ(spec.anomaly_category, "World");
  EXPECT_TRUE(spec.anomaly_known);
  EXPECT_EQ(spec.expected.test, 50u);
}

TEST(Spec, MalformedFileIsDataError) {
  TempDir dir;
  write_file(dir / "spec.json", "{\"name\": 3}");
  EXPECT_THROW(load_dataset_spec(dir / "spec.json"), DataError);
  EXPECT_THROW(load_dataset_spec(dir / "absent.json"), IoError);
}

TEST(Dataset, LoadsFixtureWithLabelsFromSpec) {
  const auto dir = testing::fixtures_dir() / "agnews_mini";
  const auto d = load_dataset(dir / "train.jsonl", dir / "test.jsonl", load_dataset_spec(dir / "spec.json"));
  EXPECT_EQ(d.train.size(), 24u);
  ASSERT_EQ(d.test.size(), 50u);
  std::size_t anomalies = 0;
  for (const auto& s : d.test) {
    EXPECT_EQ(s.label, s.category == "World" ? kAnomaly : kNormal);
    anomalies += s.label;
  }
  EXPECT_EQ(anomalies, 6u);
  EXPECT_DOUBLE_EQ(d.anomaly_ratio(), 6.0 / 50.0);
  EXPECT_EQ(d.test.front().id, "test:1");
  EXPECT_EQ(d.train.back().id, "train:24");
}

TEST(Dataset, LineErrorsNameTheLine) {
  TempDir dir;
  const auto spec = ag_spec();
  write_file(dir / "a.jsonl", "{\"text\": \"ok\", \"category\": \"Sports\"}\n\n{\"text\": \"x\"}\n");
  try {
    read_samples_jsonl(dir / "a.jsonl", spec, true, "t:");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  write_file(dir / "b.jsonl", "{\"text\": \"w\", \"category\": \"World\"}\n");
  EXPECT_THROW(read_samples_jsonl(dir / "b.jsonl", spec, true, "t:"), DataError);
  EXPECT_EQ(read_samples_jsonl(dir / "b.jsonl", spec, false, "t:").front().label, kAnomaly);
  write_file(dir / "c.jsonl", "{\"text\": \"w\", \"category\": \"Politics\"}\n");
  EXPECT_THROW(read_samples_jsonl(dir / "c.jsonl", spec, false, "t:"), DataError);
  write_file(dir / "d.jsonl",
             "{\"id\": \"a\", \"text\": \"w\", \"category\": \"Sports\"}\n"
             "{\"id\": \"a\", \"text\": \"v\", \"category\": \"Sports\"}\n");
  EXPECT_THROW(read_samples_jsonl(dir / "d.jsonl", spec, false, "t:"), DataError);
  write_file(dir / "e.jsonl", "{\"text\": \"   \", \"category\": \"Sports\"}\n");
  EXPECT_THROW(read_samples_jsonl(dir / "e.jsonl", spec, false, "t:"), DataError);
}

TEST(Dataset, DeclaredSizesAreChecked) {
  TempDir dir;
  auto spec = ag_spec();
  spec.expected.test = 3;
  write_file(dir / "train.jsonl", "{\"text\": \"a\", \"category\": \"Sports\"}\n");
  write_file(dir / "test.jsonl", "{\"text\": \"b\", \"category\": \"World\"}\n");
  EXPECT_THROW(load_dataset(dir / "train.jsonl", dir / "test.jsonl", spec), DataError);
}

TEST(Dataset, WriteThenReadRoundTrips) {
  TempDir dir;
  const std::vector<Sample> samples = {{"x1", "caf\xC3\xA9 \"quoted\"", "Sports", kNormal},
                                       {"x2", "line\nbreak", "Business", kNormal}};
  write_samples_jsonl(dir / "s.jsonl", samples);
  EXPECT_EQ(read_samples_jsonl(dir / "s.jsonl", ag_spec(), true, "t:"), samples);
}

TEST(TextStats, CountsUnicodeScalarsWithPopulationStd) {
  const std::vector<Sample> samples = {{"a", "ab", "Sports", 0},
                                       {"b", "\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9", "Sports", 0},
                                       {"c", "\xF0\x9F\x98\x80", "Sports", 0}};
  const auto st = compute_text_stats(samples);
  EXPECT_EQ(st.max, 4u);
  EXPECT_EQ(st.min, 1u);
  EXPECT_DOUBLE_EQ(st.avg, 7.0 / 3.0);
  const double mean = 7.0 / 3.0;
  const double var = ((2 - mean) * (2 - mean) + (4 - mean) * (4 - mean) + (1 - mean) * (1 - mean)) / 3.0;
  EXPECT_NEAR(st.std, std::sqrt(var), 1e-12);
  EXPECT_THROW(compute_text_stats(std::vector<Sample>{}), InvalidArgument);
}

TEST(TextStats, InvalidUtf8IsDataError) {
  const std::vector<Sample> samples = {{"a", "\xC3", "Sports", 0}};
  EXPECT_THROW(compute_text_stats(samples), DataError);
}

Dataset agnews() {
  const auto dir = testing::fixtures_dir() / "agnews_mini";
  return load_dataset(dir / "train.jsonl", dir / "test.jsonl", load_dataset_spec(dir / "spec.json"));
}

TEST(SmallTrain, KeepsVPerCategoryInFileOrder) {
  const auto d = agnews();
  const auto small = sample_small_train(d, 3, 42);
  ASSERT_EQ(small.train.size(), 9u);
  std::map<std::string, int> per;
  for (const auto& s : small.train) ++per[s.category];
  for (const auto& c : d.spec.normal_categories) EXPECT_EQ(per[c], 3);
  // Order follows the source split.
  std::vector<std::size_t> positions;
  for (const auto& s : small.train) {
    positions.push_back(static_cast<std::size_t>(
        std::find(d.train.begin(), d.train.end(), s) - d.train.begin()));
  }
  EXPECT_TRUE(std::is_sorted(positions.begin(), positions.end()));
  EXPECT_EQ(small.test, d.test);
}

TEST(SmallTrain, SeedDeterminesSelection) {
  const auto d = agnews();
  EXPECT_EQ(sample_small_train(d, 4, 42).train, sample_small_train(d, 4, 42).train);
  std::set<std::vector<std::string>> distinct;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<std::string> ids;
    for (const auto& s : sample_small_train(d, 4, seed).train) ids.push_back(s.id);
    distinct.insert(ids);
  }
  EXPECT_GT(distinct.size(), 5u);
}

TEST(SmallTrain, RejectsTooFewSamples) {
  const auto d = agnews();
  EXPECT_THROW(sample_small_train(d, 9, 42), InvalidArgument);
  EXPECT_THROW(sample_small_train(d, 0, 42), InvalidArgument);
  EXPECT_EQ(sample_small_train(d, 8, 42).train, d.train);
}

TEST(Text, FoldAndTrim) {
  EXPECT_EQ(text::trim("  a b \n"), "a b");
  EXPECT_EQ(text::fold("  Premier League "), text::fold("premier league"));
  EXPECT_NE(text::fold("Premier  League"), text::fold("premier league"));
  EXPECT_EQ(text::format_fixed(190.05, 1), "190.1");
  EXPECT_EQ(text::format_double(0.1), "0.1");
}

}  // namespace
}  // namespace adlab
