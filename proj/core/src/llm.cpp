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

#include "adlab/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>

#include "adlab/hash.hpp"
#include "http_client.hpp"
#include "json.hpp"
#include "text.hpp"

namespace adlab {

using nlohmann::json;

const char* to_string(FinishReason r) {
  switch (r) {
    case FinishReason::kLength:
      return "length";
    case FinishReason::kFiltered:
      return "filtered";
    case FinishReason::kStop:
      break;
  }
  return "stop";
}

FinishReason parse_finish_reason(const std::string& s) {
  if (s == "stop") return FinishReason::kStop;
  if (s == "length") return FinishReason::kLength;
  if (s == "filtered" || s == "content_filter") return FinishReason::kFiltered;
  throw DataError("unknown finish_reason '" + s + "'");
}

const char* to_string(FailureKind k) {
  switch (k) {
    case FailureKind::kRepetitionLoop:
      return "RepetitionLoop";
    case FailureKind::kSafetyRefusal:
      return "SafetyRefusal";
    case FailureKind::kMalformedOutput:
      return "MalformedOutput";
    case FailureKind::kTransport:
      return "Transport";
    case FailureKind::kFormatViolation:
      return "FormatViolation";
  }
  return "MalformedOutput";
}

FailureKind parse_failure_kind(const std::string& s) {
  for (int i = 0; i < kFailureKindCount; ++i) {
    const auto k = static_cast<FailureKind>(i);
    if (s == to_string(k)) return k;
  }
  throw DataError("unknown failure kind '" + s + "'");
}

void validate_request(const ChatRequest& request) {
  if (request.prompt.empty()) throw InvalidArgument("chat request: empty prompt");
  if (request.temperature &&
      !(*request.temperature >= 0.0 && *request.temperature <= 2.0)) {
    throw InvalidArgument("chat request: temperature must lie in [0, 2]");
  }
  if (request.max_tokens <= 0) throw InvalidArgument("chat request: max_tokens must be positive");
}

std::string request_key(const ChatRequest& request) {
  std::string material = request.model_id;
  material.push_back('\0');
  material += request.temperature ? text::format_double(*request.temperature) : "default";
  material.push_back('\0');
  material += request.seed ? std::to_string(*request.seed) : "none";
  material.push_back('\0');
  material += request.prompt;
  return sha256_hex(material);
}

// ---------------------------------------------------------------------------
// Replay store

ReplayStore::ReplayStore(std::filesystem::path path) : path_(std::move(path)) {
  warn_ = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // created on first append
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto rec = decode(line);
      entries_[rec.key] = std::move(rec.outcome);
    } catch (const Error& e) {
      throw DataError(path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<ChatOutcome> ReplayStore::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t ReplayStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

void ReplayStore::set_warning_sink(std::function<void(const std::string&)> sink) {
  std::unique_lock lock(mu_);
  warn_ = std::move(sink);
}

bool ReplayStore::append(const ChatRequest& request, const ChatOutcome& outcome) {
  ReplayRecord rec{request_key(request), request, outcome};
  const std::string line = encode(rec);
  std::unique_lock lock(mu_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to replay store " + path_.string());
  out << line << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path_.string());
  const bool overwritten = entries_.contains(rec.key);
  entries_[rec.key] = outcome;
  if (overwritten && warn_) {
    warn_("replay store " + path_.string() + ": re-recorded request " + rec.key +
          "; the newer response wins");
  }
  return overwritten;
}

std::string ReplayStore::encode(const ReplayRecord& record) {
  json req = {{"model_id", record.request.model_id},
              {"temperature", nullptr},
              {"seed", nullptr},
              {"max_tokens", record.request.max_tokens},
              {"prompt", record.request.prompt}};
  if (record.request.temperature) req["temperature"] = *record.request.temperature;
  if (record.request.seed) req["seed"] = *record.request.seed;
  json j = {{"key", record.key},
            {"request", req},
            {"response",
             {{"text", record.outcome.text},
              {"finish_reason", to_string(record.outcome.finish_reason)},
              {"latency_ms", record.outcome.latency_ms}}}};
  return j.dump();
}

ReplayRecord ReplayStore::decode(const std::string& line) {
  ReplayRecord rec;
  try {
    const json j = json::parse(line);
    rec.key = j.at("key").get<std::string>();
    const auto& req = j.at("request");
    rec.request.model_id = req.at("model_id").get<std::string>();
    if (!req.at("temperature").is_null()) rec.request.temperature = req["temperature"].get<double>();
    if (!req.at("seed").is_null()) rec.request.seed = req["seed"].get<std::int64_t>();
    rec.request.max_tokens = req.at("max_tokens").get<int>();
    rec.request.prompt = req.at("prompt").get<std::string>();
    const auto& res = j.at("response");
    rec.outcome.text = res.at("text").get<std::string>();
    rec.outcome.finish_reason = parse_finish_reason(res.at("finish_reason").get<std::string>());
    rec.outcome.latency_ms = res.at("latency_ms").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed replay record: ") + e.what());
  }
  if (rec.key != request_key(rec.request)) {
    throw DataError("replay record key " + rec.key + " does not match its request snapshot");
  }
  return rec;
}

ChatOutcome ReplayChatProvider::do_complete(const ChatRequest& request) {
  const auto key = request_key(request);
  if (auto hit = store_->lookup(key)) return *hit;
  throw ReplayMissError(key);
}

ChatOutcome RecordingChatProvider::do_complete(const ChatRequest& request) {
  auto outcome = inner_->complete(request);
  store_->append(request, outcome);
  return outcome;
}

void record_session(const std::filesystem::path& path,
                    std::span<const std::pair<ChatRequest, ChatOutcome>> exchanges) {
  ReplayStore store(path);
  for (const auto& [req, out] : exchanges) {
    validate_request(req);
    store.append(req, out);
  }
}

// ---------------------------------------------------------------------------
// Live endpoint

LiveEndpointConfig LiveEndpointConfig::from_environment() {
  LiveEndpointConfig c;
  if (const char* key = std::getenv("ADLAB_API_KEY")) c.api_key = key;
  if (const char* url = std::getenv("ADLAB_BASE_URL"); url && *url) c.base_url = url;
  return c;
}

std::string LiveChatProvider::build_request_body(const ChatRequest& request) {
  json body = {{"model", request.model_id},
               {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
               {"max_tokens", request.max_tokens}};
  if (request.temperature) body["temperature"] = *request.temperature;
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

ChatOutcome LiveChatProvider::parse_response_body(const std::string& body) {
  ChatOutcome out;
  try {
    const json j = json::parse(body);
    const auto& choice = j.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    out.text = content.is_null() ? std::string() : content.get<std::string>();
    const auto& fr = choice.value("finish_reason", json("stop"));
    out.finish_reason = fr.is_null() ? FinishReason::kStop : parse_finish_reason(fr.get<std::string>());
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected chat-completions payload: ") + e.what());
  }
  return out;
}

ChatOutcome LiveChatProvider::do_complete(const ChatRequest& request) {
  const std::string body = build_request_body(request);
  const auto start = std::chrono::steady_clock::now();
  const std::string response =
      detail::with_retries(config_.max_attempts, config_.initial_backoff, [&] {
        auto res = detail::post_json(config_.base_url, "/chat/completions", body, config_.api_key,
                                     config_.timeout);
        if (res.status < 200 || res.status >= 300) {
          throw TransportError("HTTP " + std::to_string(res.status) + ": " +
                               res.body.substr(0, 200));
        }
        return res.body;
      });
  auto out = parse_response_body(response);
  out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return out;
}

// ---------------------------------------------------------------------------
// Failure screening

bool detect_repetition_loop(const std::string& raw, const RepetitionConfig& config) {
  const std::size_t unit = std::max<std::size_t>(1, config.min_unit);
  const std::size_t repeats = std::max<std::size_t>(2, config.min_repeats);
  if (raw.size() < unit * repeats) return false;
  std::u32string s;
  try {
    s = text::utf8_decode(raw);
  } catch (const DataError&) {
    // Invalid UTF-8 is scanned byte by byte.
    s.assign(raw.begin(), raw.end());
  }
  const std::size_t n = s.size();
  // A run of L matches s[i] == s[i + p] spans L + p characters of period p,
  // i.e. floor((L + p) / p) back-to-back copies of the leading p characters.
  for (std::size_t p = unit; p * repeats <= n; ++p) {
    const std::size_t need = (repeats - 1) * p;
    std::size_t run = 0;
    for (std::size_t i = 0; i + p < n; ++i) {
      if (s[i] == s[i + p]) {
        if (++run >= need) return true;
      } else {
        run = 0;
      }
    }
  }
  return false;
}

const std::vector<std::string>& default_refusal_phrases() {
  static const std::vector<std::string> kPhrases = {
      "i'm sorry, but i can't",  "i’m sorry, but i can’t", "i cannot assist with",
      "i can't assist with",     "i can’t assist with",    "i'm unable to help with",
      "i cannot help with that", "i can't help with that",
  };
  return kPhrases;
}

bool looks_like_refusal(const std::string& t, std::span<const std::string> phrases) {
  std::string lower = t;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::any_of(phrases.begin(), phrases.end(), [&](const std::string& p) {
    return !p.empty() && lower.find(text::fold(p)) != std::string::npos;
  });
}

}  // namespace adlab
