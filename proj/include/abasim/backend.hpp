/*
 * Copyright 2026 The Abasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "abasim/errors.hpp"
#include "abasim/strategy.hpp"
#include "abasim/text.hpp"

namespace abasim {

// ---------------------------------------------------------------------------
// Generation contract

struct GenerationParams {
  double temperature = 0.7;
  int max_tokens = 256;
  std::optional<std::uint64_t> seed;
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string text;
};

// Phase tags: "observe", "think", "act:<strategy>", "correct",
// "child_gen:<response_type>". The tag routes template selection and lets
// scripted backends answer per phase.
struct GenerationRequest {
  std::string phase;
  std::string system_prompt;
  std::vector<ChatMessage> messages;
  GenerationParams params;
};

struct GenerationResponse {
  std::string text;
  double latency_seconds = 0.0;
  int retry_count = 0;
  std::vector<double> backoff_ms;  // sleeps actually taken before success/failure
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
};

inline void validate_request(const GenerationRequest& request) {
  if (request.messages.empty()) throw ArgumentError("request must carry at least one message");
  if (request.params.temperature < 0.0) throw ArgumentError("temperature must be >= 0");
}

inline GenerationResponse text_response(std::string text) {
  GenerationResponse response;
  response.text = std::move(text);
  return response;
}

class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual GenerationResponse complete(const GenerationRequest& request) = 0;
};

inline std::string make_act_phase(Strategy s) { return std::string("act:") + to_label(s); }
inline std::string make_child_phase(ResponseType r) {
  return std::string("child_gen:") + to_label(r);
}

inline std::string_view phase_family(std::string_view phase) {
  auto pos = phase.find(':');
  return pos == std::string_view::npos ? phase : phase.substr(0, pos);
}

inline std::string_view phase_param(std::string_view phase) {
  auto pos = phase.find(':');
  return pos == std::string_view::npos ? std::string_view{} : phase.substr(pos + 1);
}

// Marker message appended on re-prompts so retries are distinguishable in
// request captures (and so pure-function backends see fresh input).
inline constexpr const char* kRetryNote = "[retry]";

// Stands in for the child's opening stimulus before anyone has spoken.
inline constexpr const char* kSessionStartMarker = "[session start]";

// Rendering of a silent child turn inside histories.
inline constexpr const char* kNoResponseMarker = "[no response]";

// ---------------------------------------------------------------------------
// Prompt templates
//
// Templates are configuration: UTF-8 text files with {placeholder}
// substitution, keyed by phase tag. The engine ships no prompt prose of its
// own.

class PromptLibrary {
 public:
  void set(std::string key, std::string text) { templates_[std::move(key)] = std::move(text); }

  bool has(const std::string& key) const { return templates_.count(key) > 0; }

  static std::string apply_placeholders(std::string text,
                                        const std::map<std::string, std::string>& values) {
    for (const auto& [name, value] : values) {
      text = replace_all(std::move(text), "{" + name + "}", value);
    }
    return text;
  }

  std::string render(const std::string& key,
                     const std::map<std::string, std::string>& values) const {
    auto it = templates_.find(key);
    if (it == templates_.end()) {
      // act:<s> and child_gen:<y> may share one family-wide template.
      auto family = std::string(phase_family(key));
      it = templates_.find(family);
      if (it == templates_.end()) throw ArgumentError("no template for phase '" + key + "'");
    }
    return apply_placeholders(it->second, values);
  }

  // Loads every *.txt in a directory. File stems map to phase keys:
  // act_instruction.txt -> "act:instruction", child_gen_relevant.txt ->
  // "child_gen:relevant", anything else keeps its stem verbatim.
  static PromptLibrary from_directory(const std::string& dir) {
    PromptLibrary lib;
    std::error_code ec;
    std::filesystem::directory_iterator it(dir, ec);
    if (ec) throw ArgumentError("cannot open template directory: " + dir);
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
      std::ifstream in(entry.path(), std::ios::binary);
      std::ostringstream buffer;
      buffer << in.rdbuf();
      std::string key = entry.path().stem().string();
      if (key.rfind("act_", 0) == 0) {
        key = "act:" + key.substr(4);
      } else if (key.rfind("child_gen_", 0) == 0) {
        key = "child_gen:" + key.substr(10);
      }
      lib.set(std::move(key), buffer.str());
    }
    return lib;
  }

 private:
  std::map<std::string, std::string> templates_;
};

// ---------------------------------------------------------------------------
// Structured output parsing
//
// Agents ask the model for labeled JSON payloads but receive free text.
// parse_* extracts the first balanced JSON object that structurally matches
// the schema. A matching object with an out-of-alphabet label raises
// LabelError; no matching object raises FormatError. Neither ever aborts the
// process: callers re-prompt once, then give up.

struct Observation {
  ResponseType response_type = ResponseType::Relevant;
  std::string analysis;
  FunctionHypothesis function_hypothesis = FunctionHypothesis::None;
  Level stress = Level::Low;
  Level engagement = Level::Medium;
};

struct ThinkOutcome {
  Strategy strategy = Strategy::Pause;
  std::string cot;
};

struct TaggedPiece {
  Strategy strategy = Strategy::Other;
  std::string text;
};

namespace detail {

// All balanced {...} candidates in order of opening position, including
// nested objects (an enclosing object may match the schema while an inner
// one does not, or vice versa).
inline std::vector<nlohmann::json> json_candidates(std::string_view text) {
  std::vector<nlohmann::json> found;
  for (std::size_t start = 0; start < text.size(); ++start) {
    if (text[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}') {
        --depth;
        if (depth == 0) {
          auto candidate =
              nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!candidate.is_discarded() && candidate.is_object()) {
            found.push_back(std::move(candidate));
          }
          break;
        }
      }
    }
  }
  return found;
}

inline std::optional<std::string> get_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace detail

inline Observation parse_observation(std::string_view text,
                                     const LabelMap& labels = default_label_map()) {
  for (const nlohmann::json& obj : detail::json_candidates(text)) {
    auto response = detail::get_string(obj, "response_type");
    auto analysis = detail::get_string(obj, "analysis");
    auto hypothesis = detail::get_string(obj, "function_hypothesis");
    auto stress = detail::get_string(obj, "stress");
    auto engagement = detail::get_string(obj, "engagement");
    if (!response || !analysis || !hypothesis || !stress || !engagement) continue;
    Observation out;
    auto r = parse_response_label(*response, labels);
    if (!r) throw LabelError(*response, "response_type");
    out.response_type = *r;
    out.analysis = *analysis;
    auto h = parse_hypothesis_label(*hypothesis, labels);
    if (!h) throw LabelError(*hypothesis, "function_hypothesis");
    out.function_hypothesis = *h;
    auto s = parse_level_label(*stress, labels);
    if (!s) throw LabelError(*stress, "stress");
    out.stress = *s;
    auto e = parse_level_label(*engagement, labels);
    if (!e) throw LabelError(*engagement, "engagement");
    out.engagement = *e;
    return out;
  }
  throw FormatError("no observation payload found in model output");
}

inline ThinkOutcome parse_think(std::string_view text,
                                const LabelMap& labels = default_label_map()) {
  for (const nlohmann::json& obj : detail::json_candidates(text)) {
    auto strategy = detail::get_string(obj, "strategy");
    if (!strategy) continue;
    ThinkOutcome out;
    auto s = parse_strategy_label(*strategy, labels);
    if (!s) throw LabelError(*strategy, "strategy");
    out.strategy = *s;
    out.cot = detail::get_string(obj, "cot").value_or("");
    return out;
  }
  throw FormatError("no think payload found in model output");
}

inline std::vector<TaggedPiece> parse_correction(std::string_view text,
                                                 const LabelMap& labels = default_label_map()) {
  for (const nlohmann::json& obj : detail::json_candidates(text)) {
    auto it = obj.find("segments");
    if (it == obj.end() || !it->is_array()) continue;
    std::vector<TaggedPiece> pieces;
    bool shape_ok = true;
    for (const auto& seg : *it) {
      auto strategy = detail::get_string(seg, "strategy");
      auto piece_text = detail::get_string(seg, "text");
      if (!strategy || !piece_text) {
        shape_ok = false;
        break;
      }
      auto s = parse_strategy_label(*strategy, labels);
      if (!s) throw LabelError(*strategy, "strategy");
      pieces.push_back({*s, *piece_text});
    }
    if (shape_ok) return pieces;
  }
  throw FormatError("no segmentation payload found in model output");
}

// ---------------------------------------------------------------------------
// Scripted backend (test double)
//
// Replays canned responses: per-phase FIFO queues take precedence, then
// per-phase sticky responses, then the default queue / sticky fallback.
// Fully deterministic, captures every request for inspection, and
// serializes access so concurrent sessions can share one instance.

class ScriptedBackend : public TextBackend {
 public:
  void push(std::string text) {
    std::lock_guard<std::mutex> lock(mutex_);
    default_queue_.push_back(std::move(text));
  }

  void push(const std::string& phase, std::string text) {
    std::lock_guard<std::mutex> lock(mutex_);
    phase_queues_[phase].push_back(std::move(text));
  }

  void set_fixed(const std::string& phase, std::string text) {
    std::lock_guard<std::mutex> lock(mutex_);
    fixed_[phase] = std::move(text);
  }

  void set_default_fixed(std::string text) {
    std::lock_guard<std::mutex> lock(mutex_);
    default_fixed_ = std::move(text);
  }

  GenerationResponse complete(const GenerationRequest& request) override {
    validate_request(request);
    std::lock_guard<std::mutex> lock(mutex_);
    captured_.push_back(request);
    std::string family(phase_family(request.phase));
    for (const std::string& key : {request.phase, family}) {
      auto qit = phase_queues_.find(key);
      if (qit != phase_queues_.end() && !qit->second.empty()) {
        GenerationResponse response = text_response(qit->second.front());
        qit->second.pop_front();
        return response;
      }
      auto fit = fixed_.find(key);
      if (fit != fixed_.end()) return text_response(fit->second);
    }
    if (!default_queue_.empty()) {
      GenerationResponse response = text_response(default_queue_.front());
      default_queue_.pop_front();
      return response;
    }
    if (default_fixed_) return text_response(*default_fixed_);
    throw BackendError("script exhausted for phase '" + request.phase + "'");
  }

  std::vector<GenerationRequest> captured() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return captured_;
  }

  std::size_t call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return captured_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> default_queue_;
  std::map<std::string, std::deque<std::string>> phase_queues_;
  std::map<std::string, std::string> fixed_;
  std::optional<std::string> default_fixed_;
  std::vector<GenerationRequest> captured_;
};

// ---------------------------------------------------------------------------
// Deterministic offline backend
//
// A pure function of the request: the same request always yields the same
// response, independent of call order, so batch synthesis stays byte-stable
// under any parallelism. Intended for offline runs and reproducibility
// checks, not for clinical-quality text.

class DeterministicBackend : public TextBackend {
 public:
  GenerationResponse complete(const GenerationRequest& request) override {
    validate_request(request);
    std::uint64_t h = hash_request(request);
    std::string family(phase_family(request.phase));
    if (family == "observe") return text_response(observation_payload(h));
    if (family == "think") return text_response(think_payload(h));
    if (family == "act") {
      Strategy s = require_strategy_label(phase_param(request.phase));
      return text_response(act_text(s, h));
    }
    if (family == "correct") return text_response(correction_payload(request));
    if (family == "child_gen") {
      ResponseType r = require_response_label(phase_param(request.phase));
      return text_response(child_text(r, h));
    }
    throw BackendError("unknown phase '" + request.phase + "'");
  }

 private:
  static std::uint64_t hash_request(const GenerationRequest& request) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
      }
      h ^= 0x1F;
      h *= 1099511628211ULL;
    };
    mix(request.phase);
    mix(request.system_prompt);
    for (const ChatMessage& m : request.messages) {
      mix(m.role);
      mix(m.text);
    }
    return h;
  }

  static std::string observation_payload(std::uint64_t h) {
    ResponseType r = kResponseTypes[h % kResponseTypeCount];
    const char* engagement = (h >> 8) % 2 == 0 ? "medium" : "high";
    nlohmann::ordered_json j;
    j["response_type"] = to_label(r);
    j["analysis"] = "scripted observation";
    j["function_hypothesis"] = "none";
    j["stress"] = "low";
    j["engagement"] = engagement;
    return j.dump();
  }

  static std::string think_payload(std::uint64_t h) {
    // Never proposes Pause; the loop constraints terminate the turn.
    Strategy s = kSegmentStrategies[h % kSegmentStrategyCount];
    nlohmann::ordered_json j;
    j["strategy"] = to_label(s);
    j["cot"] = "scripted reasoning";
    return j.dump();
  }

  static std::string act_text(Strategy s, std::uint64_t h) {
    static const std::map<Strategy, std::vector<std::string>> phrases = {
        {Strategy::Instruction,
         {"What color is it?", "Can you tell me its name?", "Which one do you want?",
          "What do we do next?"}},
        {Strategy::Reinforcement,
         {"Great job!", "Well done, that is right!", "You said it beautifully!",
          "That was wonderful!"}},
        {Strategy::HalfAssistance,
         {"Is it red or green?", "It starts with a buh sound.", "Look at its shape, is it round?",
          "Think about what we saw before."}},
        {Strategy::FullAssistance,
         {"It is an apple. Say apple.", "We say thank you. Now you try.",
          "This one is blue. Can you say blue?", "The answer is two. Say two."}},
        {Strategy::Other,
         {"Alright, let us settle down.", "I see you like that.", "Hello there!",
          "Okay, that is fine."}},
    };
    const auto& pool = phrases.at(s);
    return pool[(h >> 16) % pool.size()];
  }

  static std::string child_text(ResponseType r, std::uint64_t h) {
    if (r == ResponseType::Unresponsive) return "";
    static const std::map<ResponseType, std::vector<std::string>> phrases = {
        {ResponseType::Relevant, {"apple", "red", "yes", "two", "I want that one"}},
        {ResponseType::Irrelevant,
         {"I want to play blocks", "where is the bear", "car car", "look outside"}},
        {ResponseType::Repetitive, {"what color what color", "say apple", "red red red"}},
    };
    const auto& pool = phrases.at(r);
    return pool[(h >> 16) % pool.size()];
  }

  // Correction requests carry a machine-readable final message
  // {"raw_text":...,"strategy":...}; echo the whole text back as one piece
  // tagged with the target strategy.
  static std::string correction_payload(const GenerationRequest& request) {
    std::string raw;
    std::string strategy = "other";
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
      auto parsed = nlohmann::json::parse(it->text, nullptr, false);
      if (parsed.is_discarded() || !parsed.is_object()) continue;
      if (parsed.contains("raw_text") && parsed.contains("strategy")) {
        raw = parsed["raw_text"].get<std::string>();
        strategy = parsed["strategy"].get<std::string>();
        break;
      }
    }
    nlohmann::ordered_json j;
    j["segments"] = {{{"strategy", strategy}, {"text", raw}}};
    return j.dump();
  }
};

}  // namespace abasim
