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

#ifndef ADLAB_SRC_TEXT_HPP_
#define ADLAB_SRC_TEXT_HPP_

#include <cstddef>
#include <string>
#include <string_view>

namespace adlab::text {

// Number of Unicode scalar values in a UTF-8 string. Throws DataError on
// invalid UTF-8.
std::size_t utf8_length(std::string_view s);

// Decodes UTF-8 into scalar values. Throws DataError on invalid input.
std::u32string utf8_decode(std::string_view s);

std::string_view trim(std::string_view s);

// ASCII case fold plus trim; sufficient for keyword dedup.
std::string fold(std::string_view s);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// Fixed-point with the given number of decimals ("190.1").
std::string format_fixed(double v, int decimals);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace adlab::text

#endif  // ADLAB_SRC_TEXT_HPP_
