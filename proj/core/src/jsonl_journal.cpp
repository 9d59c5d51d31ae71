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

#include "jsonl_journal.hpp"

#include <fstream>
#include <sstream>

#include "adlab/error.hpp"

namespace adlab::detail {

JsonlJournal::JsonlJournal(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  std::size_t good_end = 0;
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos < content.size();) {
    const std::size_t nl = content.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) break;  // partial trailing record
    const std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      good_end = pos;
      continue;
    }
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw DataError(path_.string() + ":" + std::to_string(line_no) + ": invalid journal record");
    }
    auto id = j["id"].get<std::string>();
    records_[std::move(id)] = std::move(j);
    good_end = pos;
  }
  if (good_end < content.size()) {
    in.close();
    std::filesystem::resize_file(path_, good_end);
  }
}

bool JsonlJournal::contains(const std::string& id) const {
  std::lock_guard lock(mu_);
  return records_.contains(id);
}

std::optional<nlohmann::json> JsonlJournal::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::size_t JsonlJournal::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

void JsonlJournal::append(const nlohmann::json& record) {
  if (!record.is_object() || !record.contains("id") || !record["id"].is_string()) {
    throw InvalidArgument("journal records need a string \"id\"");
  }
  std::lock_guard lock(mu_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path_.string());
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path_.string());
  records_[record["id"].get<std::string>()] = record;
}

}  // namespace adlab::detail
