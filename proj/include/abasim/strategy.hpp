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

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "abasim/errors.hpp"

namespace abasim {

// The closed alphabet of doctor actions. Pause is a loop-control signal only:
// it terminates the doctor's turn and never appears in stored transcripts.
enum class Strategy {
  Instruction,
  Reinforcement,
  HalfAssistance,
  FullAssistance,
  Other,
  Pause,
};

// The closed alphabet of child reactions.
enum class ResponseType {
  Relevant,
  Irrelevant,
  Unresponsive,
  Repetitive,
};

enum class FunctionHypothesis { Escape, Sensory, Attention, None };

// Discrete intensity scale used for stress / engagement estimates.
enum class Level { Low, Medium, High };

enum class Phenotype { Compliant, Impulsive, Difficult, PromptDependent };

inline constexpr std::array<Strategy, 6> kAllStrategies = {
    Strategy::Instruction,    Strategy::Reinforcement, Strategy::HalfAssistance,
    Strategy::FullAssistance, Strategy::Other,         Strategy::Pause,
};

// Strategies that may label a transcript segment (everything but Pause).
inline constexpr std::array<Strategy, 5> kSegmentStrategies = {
    Strategy::Instruction,    Strategy::Reinforcement, Strategy::HalfAssistance,
    Strategy::FullAssistance, Strategy::Other,
};

inline constexpr std::array<ResponseType, 4> kResponseTypes = {
    ResponseType::Relevant,
    ResponseType::Irrelevant,
    ResponseType::Unresponsive,
    ResponseType::Repetitive,
};

inline constexpr std::size_t kSegmentStrategyCount = kSegmentStrategies.size();
inline constexpr std::size_t kResponseTypeCount = kResponseTypes.size();

// A directive action explicitly demands a child response; after a
// non-directive action the child speaks only by interrupting.
inline bool is_directive(Strategy s) {
  return s == Strategy::Instruction || s == Strategy::HalfAssistance ||
         s == Strategy::FullAssistance;
}

inline bool is_non_directive(Strategy s) {
  return s == Strategy::Reinforcement || s == Strategy::Other;
}

inline const char* to_label(Strategy s) {
  switch (s) {
    case Strategy::Instruction: return "instruction";
    case Strategy::Reinforcement: return "reinforcement";
    case Strategy::HalfAssistance: return "half_assistance";
    case Strategy::FullAssistance: return "full_assistance";
    case Strategy::Other: return "other";
    case Strategy::Pause: return "pause";
  }
  return "?";
}

inline const char* to_label(ResponseType r) {
  switch (r) {
    case ResponseType::Relevant: return "relevant";
    case ResponseType::Irrelevant: return "irrelevant";
    case ResponseType::Unresponsive: return "unresponsive";
    case ResponseType::Repetitive: return "repetitive";
  }
  return "?";
}

inline const char* to_label(FunctionHypothesis h) {
  switch (h) {
    case FunctionHypothesis::Escape: return "escape";
    case FunctionHypothesis::Sensory: return "sensory";
    case FunctionHypothesis::Attention: return "attention";
    case FunctionHypothesis::None: return "none";
  }
  return "?";
}

inline const char* to_label(Level l) {
  switch (l) {
    case Level::Low: return "low";
    case Level::Medium: return "medium";
    case Level::High: return "high";
  }
  return "?";
}

inline const char* to_label(Phenotype p) {
  switch (p) {
    case Phenotype::Compliant: return "compliant";
    case Phenotype::Impulsive: return "impulsive";
    case Phenotype::Difficult: return "difficult";
    case Phenotype::PromptDependent: return "prompt_dependent";
  }
  return "?";
}

// Folds case and separators so "Half-Assistance", "half assistance" and
// "HALF_ASSISTANCE" all normalize to "halfassistance".
inline std::string normalize_label_key(std::string_view raw) {
  std::string key;
  key.reserve(raw.size());
  for (char c : raw) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) key.push_back(static_cast<char>(std::tolower(uc)));
  }
  return key;
}

// Normalization table for labels produced by generation backends. Model
// output drifts in casing, hyphenation and near-synonyms; the table is plain
// data so deployments can extend it.
struct LabelMap {
  std::map<std::string, Strategy> strategies;
  std::map<std::string, ResponseType> responses;
  std::map<std::string, FunctionHypothesis> hypotheses;
  std::map<std::string, Level> levels;
};

inline const LabelMap& default_label_map() {
  static const LabelMap map = [] {
    LabelMap m;
    for (Strategy s : kAllStrategies) m.strategies[normalize_label_key(to_label(s))] = s;
    m.strategies["halfassist"] = Strategy::HalfAssistance;
    m.strategies["fullassist"] = Strategy::FullAssistance;
    m.strategies["reinforce"] = Strategy::Reinforcement;
    m.strategies["wait"] = Strategy::Pause;
    for (ResponseType r : kResponseTypes) m.responses[normalize_label_key(to_label(r))] = r;
    m.responses["repetition"] = ResponseType::Repetitive;
    m.responses["noresponse"] = ResponseType::Unresponsive;
    m.responses["unresponse"] = ResponseType::Unresponsive;
    m.responses["related"] = ResponseType::Relevant;
    m.responses["unrelated"] = ResponseType::Irrelevant;
    m.hypotheses["escape"] = FunctionHypothesis::Escape;
    m.hypotheses["avoidance"] = FunctionHypothesis::Escape;
    m.hypotheses["escapeavoidance"] = FunctionHypothesis::Escape;
    m.hypotheses["sensory"] = FunctionHypothesis::Sensory;
    m.hypotheses["sensorystimulation"] = FunctionHypothesis::Sensory;
    m.hypotheses["attention"] = FunctionHypothesis::Attention;
    m.hypotheses["accesstoattention"] = FunctionHypothesis::Attention;
    m.hypotheses["none"] = FunctionHypothesis::None;
    m.hypotheses["unknown"] = FunctionHypothesis::None;
    m.levels["low"] = Level::Low;
    m.levels["medium"] = Level::Medium;
    m.levels["mid"] = Level::Medium;
    m.levels["high"] = Level::High;
    return m;
  }();
  return map;
}

inline std::optional<Strategy> parse_strategy_label(std::string_view raw,
                                                    const LabelMap& map = default_label_map()) {
  auto it = map.strategies.find(normalize_label_key(raw));
  if (it == map.strategies.end()) return std::nullopt;
  return it->second;
}

inline std::optional<ResponseType> parse_response_label(std::string_view raw,
                                                        const LabelMap& map = default_label_map()) {
  auto it = map.responses.find(normalize_label_key(raw));
  if (it == map.responses.end()) return std::nullopt;
  return it->second;
}

inline std::optional<FunctionHypothesis> parse_hypothesis_label(
    std::string_view raw, const LabelMap& map = default_label_map()) {
  auto it = map.hypotheses.find(normalize_label_key(raw));
  if (it == map.hypotheses.end()) return std::nullopt;
  return it->second;
}

inline std::optional<Level> parse_level_label(std::string_view raw,
                                              const LabelMap& map = default_label_map()) {
  auto it = map.levels.find(normalize_label_key(raw));
  if (it == map.levels.end()) return std::nullopt;
  return it->second;
}

inline Strategy require_strategy_label(std::string_view raw,
                                       const LabelMap& map = default_label_map()) {
  auto s = parse_strategy_label(raw, map);
  if (!s) throw LabelError(std::string(raw), "strategy");
  return *s;
}

inline ResponseType require_response_label(std::string_view raw,
                                           const LabelMap& map = default_label_map()) {
  auto r = parse_response_label(raw, map);
  if (!r) throw LabelError(std::string(raw), "response_type");
  return *r;
}

// Dense index of a segment strategy; Pause has no index.
inline std::size_t strategy_index(Strategy s) {
  switch (s) {
    case Strategy::Instruction: return 0;
    case Strategy::Reinforcement: return 1;
    case Strategy::HalfAssistance: return 2;
    case Strategy::FullAssistance: return 3;
    case Strategy::Other: return 4;
    case Strategy::Pause: break;
  }
  throw ArgumentError("pause carries no segment index");
}

inline std::size_t response_index(ResponseType r) { return static_cast<std::size_t>(r); }

}  // namespace abasim
