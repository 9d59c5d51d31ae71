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

#ifndef ADLAB_SRC_HTTP_CLIENT_INL_HPP_
#define ADLAB_SRC_HTTP_CLIENT_INL_HPP_

#include <algorithm>
#include <exception>
#include <thread>

#include "adlab/llm.hpp"

namespace adlab::detail {

template <typename Fn>
std::string with_retries(int max_attempts, std::chrono::milliseconds initial_backoff, Fn&& fn) {
  const int attempts = std::max(1, max_attempts);
  std::string last_error;
  auto backoff = initial_backoff;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      return fn();
    } catch (const std::exception& e) {
      last_error = e.what();
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError("giving up after " + std::to_string(attempts) +
                       " attempts: " + last_error);
}

}  // namespace adlab::detail

#endif  // ADLAB_SRC_HTTP_CLIENT_INL_HPP_
