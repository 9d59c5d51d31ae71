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

#include "adlab/zeroshot.hpp"

#include <cmath>
#include <mutex>

#include "json_extract.hpp"
#include "jsonl_journal.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace adlab {

using nlohmann::json;

const char* to_string(DetectionSetting s) {
  return s == DetectionSetting::kNormalOnly ? "normal-only" : "normal-anomaly";
}

DetectionSetting parse_detection_setting(const std::string& s) {
  if (s == "normal-only") return DetectionSetting::kNormalOnly;
  if (s == "normal-anomaly") return DetectionSetting::kNormalPlusAnomaly;
  throw InvalidArgument("unknown setting '" + s + "' (expected normal-only or normal-anomaly)");
}

PromptContext PromptContext::from_spec(const DatasetSpec& spec, DetectionSetting setting) {
  validate_spec(spec);
  PromptContext ctx;
  for (const auto& c : spec.normal_categories) ctx.normal.push_back({c, std::nullopt});
  if (setting == DetectionSetting::kNormalPlusAnomaly) {
    if (!spec.anomaly_known) {
      throw InvalidArgument("the normal-anomaly setting needs a known anomaly category, but " +
                            spec.name + " declares it unknown");
    }
    ctx.anomaly = CategoryEntry{spec.anomaly_category, std::nullopt};
  }
  return ctx;
}

void validate_context(const PromptContext& ctx, DetectionSetting setting) {
  if (ctx.normal.empty()) throw InvalidArgument("prompt context has no normal categories");
  const auto check = [](const CategoryEntry& e) {
    if (text::trim(e.name).empty()) throw InvalidArgument("prompt context has an empty category");
    if (e.description && text::trim(*e.description).empty()) {
      throw InvalidArgument("empty description for category " + e.name);
    }
  };
  for (const auto& e : ctx.normal) check(e);
  const bool wants_anomaly = setting == DetectionSetting::kNormalPlusAnomaly;
  if (wants_anomaly != ctx.anomaly.has_value()) {
    throw InvalidArgument(wants_anomaly
                              ? "normal-anomaly setting needs an anomaly category in the context"
                              : "normal-only setting must not carry an anomaly category");
  }
  if (ctx.anomaly) check(*ctx.anomaly);
}

namespace {

DetectionAnswer parse_answer(const std::string& text, const RepetitionConfig& rep) {
  if (detect_repetition_loop(text, rep)) {
    throw LlmError(FailureKind::kRepetitionLoop, "response repeats itself");
  }
  auto obj = detail::extract_first_json_object(text);
  if (!obj) throw LlmError(FailureKind::kMalformedOutput, "no JSON object in response");
  if (!obj->contains("reason") || !(*obj)["reason"].is_string()) {
    throw LlmError(FailureKind::kMalformedOutput, "missing string key \"reason\"");
  }
  if (!obj->contains("anomaly_score")) {
    throw LlmError(FailureKind::kMalformedOutput, "missing key \"anomaly_score\"");
  }
  const auto& s = (*obj)["anomaly_score"];
  if (!s.is_number()) {
    throw LlmError(FailureKind::kFormatViolation, "anomaly_score is not a number: " + s.dump());
  }
  const double v = s.get<double>();
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw LlmError(FailureKind::kFormatViolation,
                   "anomaly_score outside [0, 1]: " + text::format_double(v));
  }
  return {(*obj)["reason"].get<std::string>(), v};
}

json record_to_json(const DetectionRecord& r, const std::string& key) {
  json j = {{"id", r.sample_id}, {"request_key", key}};
  if (r.failure) {
    j["failure"] = {{"kind", to_string(r.failure->kind)}, {"detail", r.failure->detail}};
  } else {
    j["reason"] = r.reason;
    j["anomaly_score"] = r.anomaly_score;
  }
  return j;
}

DetectionRecord record_from_json(const json& j, const Sample& sample) {
  DetectionRecord r;
  r.sample_id = sample.id;
  r.label = sample.label;
  if (j.contains("failure")) {
    r.failure = LlmFailure{parse_failure_kind(j["failure"].at("kind").get<std::string>()),
                           j["failure"].at("detail").get<std::string>()};
  } else {
    r.reason = j.at("reason").get<std::string>();
    r.anomaly_score = j.at("anomaly_score").get<double>();
  }
  return r;
}

}  // namespace

DetectionAnswer parse_detection_response(const std::string& text) {
  return parse_answer(text, RepetitionConfig{});
}

DetectionRecord classify_detection_outcome(const Sample& sample, const ChatOutcome& outcome,
                                           const ZeroShotConfig& config) {
  DetectionRecord r;
  r.sample_id = sample.id;
  r.label = sample.label;
  if (outcome.finish_reason == FinishReason::kFiltered) {
    r.failure = LlmFailure{FailureKind::kSafetyRefusal, "provider content filter"};
    return r;
  }
  try {
    auto a = parse_answer(outcome.text, config.repetition);
    r.reason = std::move(a.reason);
    r.anomaly_score = a.anomaly_score;
  } catch (const LlmError& e) {
    r.failure = e.failure();
    if (e.kind() == FailureKind::kMalformedOutput &&
        looks_like_refusal(outcome.text, config.refusal_phrases)) {
      r.failure = LlmFailure{FailureKind::kSafetyRefusal, "refusal phrasing in response"};
    }
  }
  return r;
}

LabeledScores ZeroShotResult::scored() const {
  LabeledScores out;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    out.scores.push_back(r.anomaly_score);
    out.labels.push_back(r.label);
  }
  return out;
}

std::size_t ZeroShotResult::failures() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.ok() ? 0 : 1;
  return n;
}

ZeroShotResult run_zero_shot(const Dataset& dataset, const PromptContext& ctx,
                             DetectionSetting setting, ChatProvider& provider,
                             const ZeroShotConfig& config) {
  validate_context(ctx, setting);
  if (config.model_id.empty()) throw InvalidArgument("zero-shot run needs a model id");
  const auto& test = dataset.test;
  ZeroShotResult result;
  result.records.resize(test.size());

  std::optional<detail::JsonlJournal> journal;
  if (config.journal) journal.emplace(*config.journal);

  std::vector<ChatRequest> requests(test.size());
  std::vector<std::string> keys(test.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < test.size(); ++i) {
    auto& req = requests[i];
    req.prompt = build_detection_prompt(test[i], ctx, setting);
    req.temperature = config.temperature;
    req.seed = config.seed;
    req.max_tokens = config.max_tokens;
    req.model_id = config.model_id;
    keys[i] = request_key(req);
    if (journal) {
      auto prior = journal->get(test[i].id);
      if (prior && prior->value("request_key", "") == keys[i]) {
        result.records[i] = record_from_json(*prior, test[i]);
        ++result.resumed;
        continue;
      }
    }
    pending.push_back(i);
  }

  std::mutex flush_mu;
  std::vector<bool> done(pending.size(), false);
  std::size_t next_flush = 0;
  detail::bounded_parallel_for(pending.size(), config.max_in_flight, [&](std::size_t k) {
    const std::size_t i = pending[k];
    DetectionRecord rec;
    const int attempts = std::max(1, config.transport_attempts);
    for (int attempt = 1;; ++attempt) {
      try {
        rec = classify_detection_outcome(test[i], provider.complete(requests[i]), config);
        break;
      } catch (const TransportError& e) {
        if (attempt < attempts) continue;
        rec = DetectionRecord{test[i].id, test[i].label, "", 0.0, e.failure()};
        break;
      }
    }
    std::lock_guard lock(flush_mu);
    result.records[i] = std::move(rec);
    done[k] = true;
    // Journal in test order. Transport failures stay out of the journal and
    // are retried on resume.
    while (next_flush < pending.size() && done[next_flush]) {
      const std::size_t j = pending[next_flush++];
      const auto& r = result.records[j];
      if (journal && !(r.failure && r.failure->kind == FailureKind::kTransport)) {
        journal->append(record_to_json(r, keys[j]));
      }
    }
  });

  for (const auto& r : result.records) {
    if (r.failure) ++result.error_counts[static_cast<std::size_t>(r.failure->kind)];
  }
  return result;
}

}  // namespace adlab
