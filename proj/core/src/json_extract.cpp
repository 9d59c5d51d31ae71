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

#include "json_extract.hpp"

#include <string>

namespace adlab::detail {
namespace {

// End index (exclusive) of the object starting at `open`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<nlohmann::json> try_parse(std::string_view span) {
  auto j = nlohmann::json::parse(span, nullptr, /*allow_exceptions=*/false);
  if (!j.is_discarded() && j.is_object()) return j;
  if (span.find("\\'") == std::string_view::npos) return std::nullopt;
  std::string repaired;
  repaired.reserve(span.size());
  for (std::size_t i = 0; i < span.size(); ++i) {
    if (span[i] == '\\' && i + 1 < span.size()) {
      if (span[i + 1] != '\'') repaired += span[i];
      repaired += span[++i];
    } else {
      repaired += span[i];
    }
  }
  j = nlohmann::json::parse(repaired, nullptr, false);
  if (!j.is_discarded() && j.is_object()) return j;
  return std::nullopt;
}

}  // namespace

std::optional<nlohmann::json> extract_first_json_object(std::string_view text) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos;
       open = text.find('{', open + 1)) {
    const std::size_t end = balanced_end(text, open);
    if (end == std::string_view::npos) continue;
    if (auto j = try_parse(text.substr(open, end - open))) return j;
  }
  return std::nullopt;
}

}  // namespace adlab::detail
