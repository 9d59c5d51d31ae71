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

#ifndef ADLAB_SRC_JSON_EXTRACT_HPP_
#define ADLAB_SRC_JSON_EXTRACT_HPP_

#include <optional>
#include <string_view>

#include "json.hpp"

namespace adlab::detail {

// Returns the first balanced {...} span in `text` that parses as a JSON
// object. Braces inside string literals and backslash escapes are skipped
// while balancing. A stray \' escape, which JSON forbids, is accepted as '.
std::optional<nlohmann::json> extract_first_json_object(std::string_view text);

}  // namespace adlab::detail

#endif  // ADLAB_SRC_JSON_EXTRACT_HPP_
