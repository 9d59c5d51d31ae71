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

#include "adlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include "adlab/error.hpp"
#include "adlab/random.hpp"
#include "json.hpp"
#include "text.hpp"

namespace adlab {

using nlohmann::json;

bool DatasetSpec::is_normal_category(const std::string& c) const {
  return std::find(normal_categories.begin(), normal_categories.end(), c) !=
         normal_categories.end();
}

double Dataset::anomaly_ratio() const {
  if (test.empty()) return 0.0;
  const auto n = std::count_if(test.begin(), test.end(),
                               [](const Sample& s) { return s.label == kAnomaly; });
  return static_cast<double>(n) / static_cast<double>(test.size());
}

void validate_spec(const DatasetSpec& spec) {
  if (spec.name.empty()) throw InvalidArgument("dataset spec: empty name");
  if (spec.normal_categories.empty()) {
    throw InvalidArgument("dataset spec '" + spec.name + "': no normal categories");
  }
  std::set<std::string> seen;
  for (const auto& c : spec.normal_categories) {
    if (c.empty()) throw InvalidArgument("dataset spec '" + spec.name + "': empty category name");
    if (!seen.insert(c).second) {
      throw InvalidArgument("dataset spec '" + spec.name + "': duplicate normal category '" + c +
                            "'");
    }
  }
  if (spec.anomaly_category.empty()) {
    throw InvalidArgument("dataset spec '" + spec.name + "': empty anomaly category");
  }
  if (seen.contains(spec.anomaly_category)) {
    throw InvalidArgument("dataset spec '" + spec.name + "': anomaly category '" +
                          spec.anomaly_category + "' is also listed as normal");
  }
}

DatasetSpec load_dataset_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset spec " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("dataset spec " + path.string() + ": " + e.what());
  }
  DatasetSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    spec.original_task = j.at("original_task").get<std::string>();
    spec.normal_categories = j.at("normal_categories").get<std::vector<std::string>>();
    spec.anomaly_category = j.at("anomaly_category").get<std::string>();
    spec.anomaly_known = j.value("anomaly_known", true);
    if (j.contains("expected")) {
      const auto& e = j.at("expected");
      if (e.contains("train")) spec.expected.train = e.at("train").get<std::size_t>();
      if (e.contains("test")) spec.expected.test = e.at("test").get<std::size_t>();
      if (e.contains("anomaly_percent")) {
        spec.expected.anomaly_percent = e.at("anomaly_percent").get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw DataError("dataset spec " + path.string() + ": " + e.what());
  }
  validate_spec(spec);
  return spec;
}

std::vector<Sample> read_samples_jsonl(const std::filesystem::path& path,
                                       const DatasetSpec& spec, bool is_train,
                                       const std::string& id_prefix) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Sample> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) -> DataError {
    return DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw fail("malformed JSON line");
    }
    if (!j.is_object() || !j.contains("text") || !j.contains("category") ||
        !j["text"].is_string() || !j["category"].is_string()) {
      throw fail("record needs string fields \"text\" and \"category\"");
    }
    Sample s;
    s.text = j["text"].get<std::string>();
    s.category = j["category"].get<std::string>();
    if (text::trim(s.text).empty()) throw fail("empty text");
    try {
      text::utf8_length(s.text);
    } catch (const DataError& e) {
      throw fail(e.what());
    }
    if (j.contains("id")) {
      if (!j["id"].is_string()) throw fail("\"id\" must be a string");
      s.id = j["id"].get<std::string>();
    } else {
      s.id = id_prefix + std::to_string(line_no);
    }
    if (s.category == spec.anomaly_category) {
      if (is_train) throw fail("anomaly-category sample '" + s.category + "' in training split");
      s.label = kAnomaly;
    } else if (spec.is_normal_category(s.category)) {
      s.label = kNormal;
    } else {
      throw fail("category '" + s.category + "' is not in dataset spec '" + spec.name + "'");
    }
    if (!ids.insert(s.id).second) throw fail("duplicate sample id '" + s.id + "'");
    out.push_back(std::move(s));
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& train_path,
                     const std::filesystem::path& test_path, const DatasetSpec& spec) {
  validate_spec(spec);
  Dataset d;
  d.spec = spec;
  d.train = read_samples_jsonl(train_path, spec, /*is_train=*/true, "train:");
  d.test = read_samples_jsonl(test_path, spec, /*is_train=*/false, "test:");
  const auto& e = spec.expected;
  if (e.train && *e.train != d.train.size()) {
    throw DataError(spec.name + ": expected " + std::to_string(*e.train) + " train samples, found " +
                    std::to_string(d.train.size()));
  }
  if (e.test && *e.test != d.test.size()) {
    throw DataError(spec.name + ": expected " + std::to_string(*e.test) + " test samples, found " +
                    std::to_string(d.test.size()));
  }
  if (e.anomaly_percent) {
    const double pct = 100.0 * d.anomaly_ratio();
    if (std::abs(pct - *e.anomaly_percent) > 0.01) {
      throw DataError(spec.name + ": expected anomaly ratio " + text::format_fixed(*e.anomaly_percent, 2) +
                      "%, found " + text::format_fixed(pct, 4) + "%");
    }
  }
  return d;
}

void write_samples_jsonl(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : samples) {
    json j = {{"id", s.id}, {"text", s.text}, {"category", s.category}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TextStats compute_text_stats(std::span<const Sample> samples) {
  if (samples.empty()) throw InvalidArgument("compute_text_stats: empty sample list");
  std::vector<std::size_t> lengths;
  lengths.reserve(samples.size());
  for (const auto& s : samples) lengths.push_back(text::utf8_length(s.text));
  TextStats st;
  st.min = *std::min_element(lengths.begin(), lengths.end());
  st.max = *std::max_element(lengths.begin(), lengths.end());
  double sum = 0.0;
  for (auto l : lengths) sum += static_cast<double>(l);
  const double n = static_cast<double>(lengths.size());
  st.avg = sum / n;
  double ss = 0.0;
  for (auto l : lengths) {
    const double d = static_cast<double>(l) - st.avg;
    ss += d * d;
  }
  st.std = std::sqrt(ss / n);
  return st;
}

Dataset sample_small_train(const Dataset& dataset, std::size_t v, std::uint64_t seed) {
  if (v == 0) throw InvalidArgument("sample_small_train: v must be positive");
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < dataset.train.size(); ++i) {
    by_category[dataset.train[i].category].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> keep;
  // Categories are visited in declaration order.
  for (const auto& c : dataset.spec.normal_categories) {
    auto& idx = by_category[c];
    if (idx.size() < v) {
      throw InvalidArgument("sample_small_train: category '" + c + "' has " +
                            std::to_string(idx.size()) + " train samples, need " +
                            std::to_string(v));
    }
    // Partial Fisher-Yates: the first v slots become the sample.
    for (std::size_t i = 0; i < v; ++i) {
      const std::size_t j = i + rng.uniform_index(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(v));
  }
  std::sort(keep.begin(), keep.end());
  Dataset out;
  out.spec = dataset.spec;
  out.test = dataset.test;
  out.train.reserve(keep.size());
  for (auto i : keep) out.train.push_back(dataset.train[i]);
  return out;
}

}  // namespace adlab
