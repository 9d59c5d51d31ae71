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

#ifndef ADLAB_LLM_HPP_
#define ADLAB_LLM_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adlab/error.hpp"

namespace adlab {

// Default completion budgets.
inline constexpr int kDetectionMaxTokens = 1024;
inline constexpr int kKeywordMaxTokens = 4096;

struct ChatRequest {
  std::string prompt;
  // Unset means "provider default" and is sent as no field at all.
  std::optional<double> temperature;
  std::optional<std::int64_t> seed;
  int max_tokens = kDetectionMaxTokens;
  std::string model_id;
};

enum class FinishReason { kStop, kLength, kFiltered };

const char* to_string(FinishReason r);
FinishReason parse_finish_reason(const std::string& s);

struct ChatOutcome {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
  std::int64_t latency_ms = 0;

  friend bool operator==(const ChatOutcome&, const ChatOutcome&) = default;
};

enum class FailureKind {
  kRepetitionLoop,
  kSafetyRefusal,
  kMalformedOutput,
  kTransport,
  kFormatViolation,
};

inline constexpr int kFailureKindCount = 5;

const char* to_string(FailureKind k);
FailureKind parse_failure_kind(const std::string& s);

struct LlmFailure {
  FailureKind kind = FailureKind::kMalformedOutput;
  std::string detail;

  friend bool operator==(const LlmFailure&, const LlmFailure&) = default;
};

// Raised when a model response cannot be used; carries the taxonomy kind.
class LlmError : public Error {
 public:
  LlmError(FailureKind kind, const std::string& detail)
      : Error(std::string(to_string(kind)) + ": " + detail), failure_{kind, detail} {}
  const LlmFailure& failure() const { return failure_; }
  FailureKind kind() const { return failure_.kind; }

 private:
  LlmFailure failure_;
};

class TransportError : public LlmError {
 public:
  explicit TransportError(const std::string& detail) : LlmError(FailureKind::kTransport, detail) {}
};

// Strict replay was asked for a request it has never seen.
class ReplayMissError : public Error {
 public:
  explicit ReplayMissError(const std::string& key)
      : Error("replay miss: no recorded response for request " + key), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Throws InvalidArgument for an empty prompt, temperature outside [0, 2],
// or a non-positive token budget.
void validate_request(const ChatRequest& request);

// Hex SHA-256 over model_id, temperature, seed and prompt, NUL separated.
// Unset temperature/seed hash as "default"/"none".
std::string request_key(const ChatRequest& request);

// Chat-completion backend. Implementations are safe to call concurrently.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  ChatOutcome complete(const ChatRequest& request) {
    validate_request(request);
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_complete(request);
  }

  // Number of complete() calls made so far.
  std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

 protected:
  virtual ChatOutcome do_complete(const ChatRequest& request) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

// Free-function spelling of provider.complete(request).
inline ChatOutcome complete(const ChatRequest& request, ChatProvider& provider) {
  return provider.complete(request);
}

struct ReplayRecord {
  std::string key;
  ChatRequest request;
  ChatOutcome outcome;
};

// Append-only JSONL file of (key, request, response) records. Later records
// for the same key supersede earlier ones on load. Reads may run
// concurrently; appends are serialized.
class ReplayStore {
 public:
  // Opens (or creates on first append) the store at path and loads it.
  explicit ReplayStore(std::filesystem::path path);

  std::optional<ChatOutcome> lookup(const std::string& key) const;
  std::size_t size() const;

  // Appends one record and flushes. Returns true when an existing key was
  // overwritten (the warning sink is also notified).
  bool append(const ChatRequest& request, const ChatOutcome& outcome);

  const std::filesystem::path& path() const { return path_; }

  // Receives warnings such as key overwrites; defaults to stderr.
  void set_warning_sink(std::function<void(const std::string&)> sink);

  static std::string encode(const ReplayRecord& record);
  static ReplayRecord decode(const std::string& line);

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::map<std::string, ChatOutcome> entries_;
  std::function<void(const std::string&)> warn_;
};

// Answers strictly from a replay store; a miss throws ReplayMissError.
class ReplayChatProvider : public ChatProvider {
 public:
  explicit ReplayChatProvider(std::shared_ptr<const ReplayStore> store)
      : store_(std::move(store)) {}

 protected:
  ChatOutcome do_complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<const ReplayStore> store_;
};

// Forwards to `inner` and appends every exchange to `store`.
class RecordingChatProvider : public ChatProvider {
 public:
  RecordingChatProvider(std::shared_ptr<ChatProvider> inner, std::shared_ptr<ReplayStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}

 protected:
  ChatOutcome do_complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::shared_ptr<ReplayStore> store_;
};

struct LiveEndpointConfig {
  // OpenAI-compatible base, e.g. "https://api.openai.com/v1".
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};

  // Reads ADLAB_API_KEY and, when set, ADLAB_BASE_URL.
  static LiveEndpointConfig from_environment();
};

// POSTs single-user-turn chat completions. Any transport error or non-2xx
// status is retried with exponential backoff; the last failure surfaces as
// TransportError.
class LiveChatProvider : public ChatProvider {
 public:
  explicit LiveChatProvider(LiveEndpointConfig config) : config_(std::move(config)) {}

  static std::string build_request_body(const ChatRequest& request);
  static ChatOutcome parse_response_body(const std::string& body);

 protected:
  ChatOutcome do_complete(const ChatRequest& request) override;

 private:
  LiveEndpointConfig config_;
};

// Appends the given exchanges to the replay store at path.
void record_session(const std::filesystem::path& path,
                    std::span<const std::pair<ChatRequest, ChatOutcome>> exchanges);

struct RepetitionConfig {
  // Shortest repeating unit, in characters.
  std::size_t min_unit = 20;
  // Consecutive occurrences (including the first) needed to flag.
  std::size_t min_repeats = 5;
};

// True iff some substring of at least min_unit characters occurs
// min_repeats times back to back.
bool detect_repetition_loop(const std::string& text, const RepetitionConfig& config = {});

const std::vector<std::string>& default_refusal_phrases();

// Case-insensitive search for any refusal phrase.
bool looks_like_refusal(const std::string& text, std::span<const std::string> phrases);

}  // namespace adlab

#endif  // ADLAB_LLM_HPP_
