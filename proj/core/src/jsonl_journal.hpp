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

#ifndef ADLAB_SRC_JSONL_JOURNAL_HPP_
#define ADLAB_SRC_JSONL_JOURNAL_HPP_

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"

namespace adlab::detail {

// Append-only JSONL file of objects keyed by their "id" member. Reopening an
// existing journal restores its records; a final line cut short by an
// interrupted write is dropped (and truncated away before the next append).
class JsonlJournal {
 public:
  explicit JsonlJournal(std::filesystem::path path);

  bool contains(const std::string& id) const;
  std::optional<nlohmann::json> get(const std::string& id) const;
  std::size_t size() const;

  // Writes one record (which must carry a string "id") and flushes.
  void append(const nlohmann::json& record);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, nlohmann::json> records_;
};

}  // namespace adlab::detail

#endif  // ADLAB_SRC_JSONL_JOURNAL_HPP_
