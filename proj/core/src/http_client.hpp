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

#ifndef ADLAB_SRC_HTTP_CLIENT_HPP_
#define ADLAB_SRC_HTTP_CLIENT_HPP_

#include <chrono>
#include <string>

namespace adlab::detail {

struct HttpResult {
  int status = 0;
  std::string body;
};

// POSTs a JSON body to base_url + path with a bearer token. Throws
// TransportError when no HTTP response is received.
HttpResult post_json(const std::string& base_url, const std::string& path,
                     const std::string& body, const std::string& bearer_token,
                     std::chrono::seconds timeout);

// Calls fn up to max_attempts times, sleeping initial_backoff * 2^k between
// attempts. fn returns a 2xx body or throws; the final error is rethrown as
// TransportError with the attempt count.
template <typename Fn>
std::string with_retries(int max_attempts, std::chrono::milliseconds initial_backoff, Fn&& fn);

}  // namespace adlab::detail

#include "http_client_inl.hpp"

#endif  // ADLAB_SRC_HTTP_CLIENT_HPP_
