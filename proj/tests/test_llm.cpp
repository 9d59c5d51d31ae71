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

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "adlab/error.hpp"
#include "adlab/llm.hpp"
#include "httplib.h"
#include "json.hpp"
#include "test_util.hpp"

namespace adlab {
namespace {

using testing::TempDir;

ChatRequest make_request(const std::string& prompt = "hello") {
  ChatRequest r;
  r.prompt = prompt;
  r.temperature = 0.0;
  r.seed = 42;
  r.model_id = "m";
  return r;
}

TEST(RequestKey, DependsOnEveryIdentityField) {
  const auto base = make_request();
  const auto k = request_key(base);
  EXPECT_EQ(k.size(), 64u);
  EXPECT_EQ(k, request_key(make_request()));
  auto r = base;
  r.prompt += " ";
  EXPECT_NE(request_key(r), k);
  r = base;
  r.temperature = 0.5;
  EXPECT_NE(request_key(r), k);
  r = base;
  r.temperature.reset();
  EXPECT_NE(request_key(r), k);
  r = base;
  r.seed = 43;
  EXPECT_NE(request_key(r), k);
  r = base;
  r.seed.reset();
  EXPECT_NE(request_key(r), k);
  r = base;
  r.model_id = "n";
  EXPECT_NE(request_key(r), k);
}

TEST(RequestKey, FieldsAreSeparated) {
  auto a = make_request("xb");
  a.model_id = "a";
  auto b = make_request("b");
  b.model_id = "ax";
  EXPECT_NE(request_key(a), request_key(b));
}

TEST(Requests, ValidationRejectsBadFields) {
  auto r = make_request("");
  EXPECT_THROW(validate_request(r), InvalidArgument);
  r = make_request();
  r.temperature = 2.5;
  EXPECT_THROW(validate_request(r), InvalidArgument);
  r.temperature = -0.1;
  EXPECT_THROW(validate_request(r), InvalidArgument);
  r = make_request();
  r.max_tokens = 0;
  EXPECT_THROW(validate_request(r), InvalidArgument);
  r = make_request();
  r.temperature = 2.0;
  EXPECT_NO_THROW(validate_request(r));
}

TEST(ReplayStore, RecordThenReplay) {
  TempDir dir;
  auto store = std::make_shared<ReplayStore>(dir / "store.jsonl");
  EXPECT_EQ(store->size(), 0u);
  ChatOutcome out{"{\"x\": 1}", FinishReason::kLength, 12};
  EXPECT_FALSE(store->append(make_request(), out));
  ReplayStore reopened(dir / "store.jsonl");
  EXPECT_EQ(reopened.size(), 1u);
  EXPECT_EQ(reopened.lookup(request_key(make_request())), out);

  ReplayChatProvider replay(std::make_shared<ReplayStore>(dir / "store.jsonl"));
  EXPECT_EQ(replay.complete(make_request()), out);
  EXPECT_THROW(replay.complete(make_request("other")), ReplayMissError);
  EXPECT_EQ(replay.calls(), 2u);
}

TEST(ReplayStore, LaterRecordsWinAndWarn) {
  TempDir dir;
  ReplayStore store(dir / "s.jsonl");
  std::vector<std::string> warnings;
  store.set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
  store.append(make_request(), {"first", FinishReason::kStop, 0});
  EXPECT_TRUE(store.append(make_request(), {"second", FinishReason::kStop, 0}));
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(ReplayStore(dir / "s.jsonl").lookup(request_key(make_request()))->text, "second");
}

TEST(ReplayStore, EncodeDecodeRoundTrip) {
  ReplayRecord rec;
  rec.request = make_request("line1\nline2 \"q\"");
  rec.request.temperature.reset();
  rec.key = request_key(rec.request);
  rec.outcome = {"caf\xC3\xA9", FinishReason::kFiltered, 7};
  const auto line = ReplayStore::encode(rec);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto back = ReplayStore::decode(line);
  EXPECT_EQ(back.key, rec.key);
  EXPECT_EQ(back.outcome, rec.outcome);
  EXPECT_EQ(back.request.prompt, rec.request.prompt);
  EXPECT_FALSE(back.request.temperature.has_value());
  EXPECT_EQ(back.request.seed, 42);
}

TEST(ReplayStore, CorruptLineIsDataError) {
  TempDir dir;
  testing::write_file(dir / "s.jsonl", "{not json}\n");
  EXPECT_THROW(ReplayStore(dir / "s.jsonl"), DataError);
}

class EchoProvider : public ChatProvider {
 protected:
  ChatOutcome do_complete(const ChatRequest& r) override { return {"echo:" + r.prompt, FinishReason::kStop, 0}; }
};

TEST(Recording, ForwardsAndStores) {
  TempDir dir;
  auto store = std::make_shared<ReplayStore>(dir / "s.jsonl");
  RecordingChatProvider rec(std::make_shared<EchoProvider>(), store);
  EXPECT_EQ(rec.complete(make_request("a")).text, "echo:a");
  EXPECT_EQ(store->size(), 1u);
  ReplayChatProvider replay(std::make_shared<ReplayStore>(dir / "s.jsonl"));
  EXPECT_EQ(replay.complete(make_request("a")).text, "echo:a");

  const std::vector<std::pair<ChatRequest, ChatOutcome>> session = {
      {make_request("b"), {"B", FinishReason::kStop, 0}}};
  record_session(dir / "s.jsonl", session);
  EXPECT_EQ(ReplayStore(dir / "s.jsonl").size(), 2u);
}

TEST(LiveBody, OmitsUnsetSamplingFields) {
  auto r = make_request("p");
  r.temperature.reset();
  r.seed.reset();
  const auto body = nlohmann::json::parse(LiveChatProvider::build_request_body(r));
  EXPECT_FALSE(body.contains("temperature"));
  EXPECT_FALSE(body.contains("seed"));
  EXPECT_EQ(body["messages"][0]["content"], "p");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["max_tokens"], 1024);
  const auto full = nlohmann::json::parse(LiveChatProvider::build_request_body(make_request()));
  EXPECT_EQ(full["temperature"], 0.0);
  EXPECT_EQ(full["seed"], 42);
}

TEST(LiveBody, ParsesChoicesAndFinishReason) {
  const auto out = LiveChatProvider::parse_response_body(
      R"({"choices":[{"message":{"role":"assistant","content":"hi"},"finish_reason":"content_filter"}]})");
  EXPECT_EQ(out.text, "hi");
  EXPECT_EQ(out.finish_reason, FinishReason::kFiltered);
  EXPECT_THROW(LiveChatProvider::parse_response_body("{}"), TransportError);
}

// Serves /v1/chat/completions on a free local port.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(int status) : status_(status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      auth_ = req.get_header_value("Authorization");
      res.status = status_;
      if (status_ == 200) {
        res.set_content(R"({"choices":[{"message":{"content":"{\"reason\":\"r\",\"anomaly_score\":0.5}"},"finish_reason":"stop"}]})",
                        "application/json");
      } else {
        res.set_content(R"({"error":{"message":"invalid api key"}})", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  LiveEndpointConfig config() const {
    LiveEndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.api_key = "test-key";
    c.initial_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::seconds(5);
    return c;
  }
  int hits() const { return hits_; }
  std::string auth() const { return auth_; }

 private:
  int status_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
  std::string auth_;
};

TEST(LiveProvider, SuccessSendsBearerToken) {
  FakeEndpoint endpoint(200);
  LiveChatProvider live(endpoint.config());
  const auto out = live.complete(make_request());
  EXPECT_EQ(out.text, "{\"reason\":\"r\",\"anomaly_score\":0.5}");
  EXPECT_EQ(endpoint.hits(), 1);
  EXPECT_EQ(endpoint.auth(), "Bearer test-key");
}

TEST(LiveProvider, UnauthorizedGivesTransportErrorAfterThreeAttempts) {
  FakeEndpoint endpoint(401);
  LiveChatProvider live(endpoint.config());
  try {
    live.complete(make_request());
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), FailureKind::kTransport);
    EXPECT_NE(std::string(e.what()).find("401"), std::string::npos) << e.what();
  }
  EXPECT_EQ(endpoint.hits(), 3);
}

TEST(LiveProvider, UnreachableHostIsTransportError) {
  LiveEndpointConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.max_attempts = 2;
  c.initial_backoff = std::chrono::milliseconds(1);
  LiveChatProvider live(c);
  EXPECT_THROW(live.complete(make_request()), TransportError);
}

TEST(Environment, KeyAndBaseUrlComeFromEnvironment) {
  ::setenv("ADLAB_API_KEY", "k-123", 1);
  ::setenv("ADLAB_BASE_URL", "http://localhost:9/v1", 1);
  auto c = LiveEndpointConfig::from_environment();
  EXPECT_EQ(c.api_key, "k-123");
  EXPECT_EQ(c.base_url, "http://localhost:9/v1");
  ::unsetenv("ADLAB_API_KEY");
  ::unsetenv("ADLAB_BASE_URL");
  c = LiveEndpointConfig::from_environment();
  EXPECT_TRUE(c.api_key.empty());
  EXPECT_EQ(c.base_url, "https://api.openai.com/v1");
}

// A looping answer seen in practice, continued for two more repetitions
// of its final clause.
const std::string kLoopUnit =
    "but the closest is Sports, but it is more closely related to the category of travel which "
    "is not listed, ";
std::string llama_loop(int repeats) {
  std::string s =
      "{\"reason\": \"The text sample is about a tour company in Australia, which relates to "
      "travel and geography, making it most closely align with the Sports category is not the "
      "best fit, but it does not fit into the Business or Sci/Tech categories, but it does fit "
      "into the Sports category is not the best fit, but it does fit into the category of travel "
      "which is related to Sports, but more closely related to the category of travel which is "
      "not listed, ";
  for (int i = 0; i < repeats; ++i) s += kLoopUnit;
  return s + "but the closest is Sports...";
}

TEST(Repetition, FlagsTheLoopingAnswer) {
  EXPECT_TRUE(detect_repetition_loop(llama_loop(5)));
  EXPECT_FALSE(detect_repetition_loop(llama_loop(3)));
  EXPECT_TRUE(detect_repetition_loop(llama_loop(3), RepetitionConfig{20, 3}));
}

TEST(Repetition, IgnoresOrdinaryAnswers) {
  EXPECT_FALSE(detect_repetition_loop(
      R"({"reason": "The article covers a football match, which aligns with Sports.", "anomaly_score": 0.05})"));
  EXPECT_FALSE(detect_repetition_loop(std::string(40, '-') + "short"));  // period 1 < min_unit
  EXPECT_FALSE(detect_repetition_loop(""));
}

TEST(Repetition, ShortUnitsBelowMinimumAreIgnored) {
  std::string s;
  for (int i = 0; i < 50; ++i) s += "ab ";
  // Any multiple of the 3-character period of at least 20 also repeats.
  EXPECT_TRUE(detect_repetition_loop(s));
  EXPECT_FALSE(detect_repetition_loop(s.substr(0, 60)));
}

TEST(Refusal, MatchesCaseInsensitively) {
  const auto& phrases = default_refusal_phrases();
  EXPECT_TRUE(looks_like_refusal("I'm Sorry, But I Can't help with this request.", phrases));
  EXPECT_TRUE(looks_like_refusal("i can\xE2\x80\x99t assist with that", phrases));
  EXPECT_FALSE(looks_like_refusal("The text is about sports.", phrases));
}

TEST(Taxonomy, NamesRoundTrip) {
  for (int k = 0; k < kFailureKindCount; ++k) {
    const auto kind = static_cast<FailureKind>(k);
    EXPECT_EQ(parse_failure_kind(to_string(kind)), kind);
  }
  EXPECT_STREQ(to_string(FailureKind::kRepetitionLoop), "RepetitionLoop");
  EXPECT_THROW(parse_failure_kind("Other"), DataError);
}

}  // namespace
}  // namespace adlab
