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
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "abasim/backend.hpp"
#include "abasim/behavior_model.hpp"
#include "abasim/dialogue.hpp"
#include "abasim/doctor_agent.hpp"
#include "abasim/orchestrator.hpp"
#include "abasim/rng.hpp"

namespace fixtures {

using namespace abasim;

// Reference corpus statistics used as ground truth across tests: conditional
// response probabilities per last doctor strategy, the marginal strategy and
// response distributions, and the interruption rate.
inline const std::map<Strategy, ResponseDistribution>& conditional_rows() {
  static const std::map<Strategy, ResponseDistribution> rows = {
      {Strategy::Instruction, {0.5971, 0.2339, 0.1435, 0.0255}},
      {Strategy::FullAssistance, {0.5339, 0.2171, 0.0956, 0.1534}},
      {Strategy::HalfAssistance, {0.5399, 0.2614, 0.1445, 0.0542}},
      {Strategy::Reinforcement, {0.6411, 0.2021, 0.0314, 0.1254}},
      {Strategy::Other, {0.5224, 0.2239, 0.0746, 0.1791}},
  };
  return rows;
}

inline constexpr double kInterruptRate = 0.0867;

inline constexpr StrategyDistribution kRealStrategyDistribution = {0.4229, 0.3162, 0.0999,
                                                                   0.0727, 0.0883};
inline constexpr ResponseDistribution kRealResponseDistribution = {0.5855, 0.2566, 0.1036,
                                                                   0.0543};

inline DoctorTurn doctor_turn(std::vector<std::pair<Strategy, std::string>> segments) {
  DoctorTurn turn;
  for (auto& [strategy, text] : segments) turn.segments.push_back({strategy, std::move(text)});
  return turn;
}

inline DoctorTurn doctor_turn(Strategy s, std::string text = "do this") {
  return doctor_turn({{s, std::move(text)}});
}

inline ChildTurn child_turn(ResponseType type, std::string text, bool interrupted = false) {
  ChildTurn turn;
  turn.response_type = type;
  turn.text = std::move(text);
  turn.interrupted = interrupted;
  return turn;
}

inline ChildTurn child_response(ResponseType type, bool interrupted = false) {
  std::string text = type == ResponseType::Unresponsive ? "" : "ok";
  return child_turn(type, std::move(text), interrupted);
}

inline Dialogue dialogue(std::string id, std::vector<Turn> turns, std::string topic = "fruit",
                         std::string child_id = "c1") {
  Dialogue d;
  d.dialogue_id = std::move(id);
  d.topic = std::move(topic);
  d.child_id = std::move(child_id);
  d.turns = std::move(turns);
  return d;
}

// Structural templates sufficient for every phase; prose-free on purpose.
inline PromptLibrary test_prompts() {
  PromptLibrary lib;
  lib.set("observe", "topic={topic}\nhistory={history}\nchild={child_text}");
  lib.set("think", "topic={topic}\nhistory={history}\nobservation={observation}\npast={past_steps}");
  lib.set("act", "topic={topic}\nhistory={history}\nstrategy={strategy}");
  lib.set("correct", "strategy={strategy}\nraw={raw_text}");
  lib.set("child_gen", "topic={topic}\nhistory={history}\nprofile={profile}\ntype={response_type}");
  return lib;
}

inline std::string observation_json(const std::string& response_type = "relevant",
                                    const std::string& stress = "low") {
  return std::string("{\"response_type\":\"") + response_type +
         "\",\"analysis\":\"ok\",\"function_hypothesis\":\"none\",\"stress\":\"" + stress +
         "\",\"engagement\":\"medium\"}";
}

inline std::string think_json(const std::string& strategy) {
  return std::string("{\"strategy\":\"") + strategy + "\",\"cot\":\"because\"}";
}

inline std::string correction_identity_json(const std::string& strategy,
                                            const std::string& text) {
  nlohmann::ordered_json j;
  j["segments"] = {{{"strategy", strategy}, {"text", text}}};
  return j.dump();
}

// A transition table with the reference conditionals scaled to large counts,
// so smoothing is negligible and lookups reproduce the rows almost exactly.
inline TransitionStats reference_stats(int k = 1, std::uint64_t scale = 1000000) {
  TransitionStats stats;
  stats.k = k;
  for (const auto& [strategy, row] : conditional_rows()) {
    ResponseCounts counts{};
    for (std::size_t r = 0; r < kResponseTypeCount; ++r) {
      counts[r] = static_cast<std::uint64_t>(row[r] * static_cast<double>(scale) + 0.5);
      stats.response_marginal[r] += counts[r];
    }
    stats.last_counts[strategy_index(strategy)] = counts;
    stats.seq_counts[{strategy}] = counts;
  }
  stats.interruptions = 867;
  stats.interrupt_opportunities = 10000;
  return stats;
}

// Behavior model wired directly from the reference tables (no fitting).
inline BehaviorModel reference_model(double alpha = 0.3) {
  BehaviorModel model;
  model.k = 1;
  model.alpha = alpha;
  model.smoothing_lambda = 0.5;
  model.backoff_threshold = 1;
  model.length_mu = std::log(18.0);
  model.length_sigma = 0.45;
  model.global = reference_stats();
  return model;
}

// Doctor policy that samples one single-segment turn per call from a fixed
// strategy distribution; used to close the loop without the O-T-A-C agent.
class SamplingDoctor : public DoctorPolicy {
 public:
  SamplingDoctor(StrategyDistribution distribution, std::uint64_t seed)
      : distribution_(distribution), rng_(seed) {}

  TurnResult take_turn(const std::vector<Turn>&, const ChildStimulus&,
                       const std::string&) override {
    Strategy s = kSegmentStrategies[rng_.categorical(
        std::span<const double>(distribution_.data(), distribution_.size()))];
    TurnResult result;
    result.turn = doctor_turn(s, std::string("say ") + to_label(s));
    result.trace.observation = Observation{};
    result.trace.steps.push_back(
        {{s, ""}, result.turn.segments[0].text, result.turn.segments[0].text, false, false});
    result.trace.steps.push_back({{Strategy::Pause, ""}, "", "", false, false});
    result.trace.final_turn = result.turn;
    return result;
  }

 private:
  StrategyDistribution distribution_;
  Rng rng_;
};

// Backend that answers every request with randomized but schema-valid
// payloads: think proposals may repeat, stack instructions, or ask for Pause
// at bad moments. Re-prompted requests (retry marker) always get a usable,
// non-Pause answer so sessions run to completion while every constraint
// path gets exercised.
class AdversarialBackend : public TextBackend {
 public:
  explicit AdversarialBackend(std::uint64_t seed) : rng_(seed) {}

  GenerationResponse complete(const GenerationRequest& request) override {
    validate_request(request);
    bool retry = !request.messages.empty() && request.messages.back().text == kRetryNote;
    std::string family(phase_family(request.phase));
    if (family == "observe") {
      if (!retry && rng_.bernoulli(0.1)) return text_response("no payload here");
      ResponseType r = kResponseTypes[rng_.uniform_index(kResponseTypeCount)];
      return text_response(observation_json(to_label(r)));
    }
    if (family == "think") {
      if (!retry && rng_.bernoulli(0.05)) return text_response("just text, no json");
      if (retry) {
        Strategy s = kSegmentStrategies[rng_.uniform_index(kSegmentStrategyCount)];
        return text_response(think_json(to_label(s)));
      }
      Strategy s = kAllStrategies[rng_.uniform_index(kAllStrategies.size())];
      return text_response(think_json(to_label(s)));
    }
    if (family == "act") {
      static const std::vector<std::string> texts = {
          "Great job! What else do you want?",
          "Look at the red apple. Can you say apple? Wonderful!",
          "What color is it?",
          "That was lovely. Now sit down. One more question: why?",
      };
      return text_response(texts[rng_.uniform_index(texts.size())]);
    }
    if (family == "correct") {
      return text_response(random_correction(request));
    }
    if (family == "child_gen") {
      return text_response("child words");
    }
    throw BackendError("unexpected phase " + request.phase);
  }

 private:
  // Random split of the raw text into pieces with random tags; at least one
  // piece always keeps the target tag so the filter never empties twice.
  std::string random_correction(const GenerationRequest& request) {
    std::string raw;
    std::string target = "other";
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
      auto parsed = nlohmann::json::parse(it->text, nullptr, false);
      if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("raw_text")) {
        raw = parsed["raw_text"].get<std::string>();
        target = parsed["strategy"].get<std::string>();
        break;
      }
    }
    // split at spaces into 1..3 pieces
    std::vector<std::string> pieces;
    if (raw.size() < 8 || rng_.bernoulli(0.3)) {
      pieces.push_back(raw);
    } else {
      std::size_t cut = raw.size() / 2;
      while (cut < raw.size() && raw[cut] != ' ') ++cut;
      if (cut >= raw.size()) {
        pieces.push_back(raw);
      } else {
        pieces.push_back(raw.substr(0, cut));
        pieces.push_back(raw.substr(cut + 1));
      }
    }
    nlohmann::ordered_json segments = nlohmann::ordered_json::array();
    std::size_t keep = rng_.uniform_index(pieces.size());
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      std::string tag = i == keep ? target
                                  : std::string(to_label(
                                        kSegmentStrategies[rng_.uniform_index(5)]));
      segments.push_back({{"strategy", tag}, {"text", pieces[i]}});
    }
    nlohmann::ordered_json j;
    j["segments"] = std::move(segments);
    return j.dump();
  }

  Rng rng_;
};

// Samples a corpus from the reference tables: directive strategies cue a
// child response every time; non-directive ones open the interruption gate
// with the reference probability. Returns dialogues of at most 50 turns.
inline std::vector<Dialogue> sample_reference_corpus(std::size_t child_turns_per_strategy,
                                                     std::uint64_t seed,
                                                     const std::string& child_id = "c1") {
  Rng rng(seed);
  std::vector<Dialogue> corpus;
  std::vector<Turn> current;
  std::size_t dialogue_index = 0;
  auto flush = [&](bool force) {
    if (current.size() >= 40 || (force && !current.empty())) {
      corpus.push_back(dialogue("d" + std::to_string(dialogue_index++), current, "fruit",
                                child_id));
      current.clear();
    }
  };
  for (const auto& [strategy, row] : conditional_rows()) {
    std::size_t sampled = 0;
    while (sampled < child_turns_per_strategy) {
      current.push_back(doctor_turn(strategy));
      bool child_speaks = true;
      bool interrupted = false;
      if (is_non_directive(strategy)) {
        child_speaks = rng.bernoulli(kInterruptRate);
        interrupted = child_speaks;
      }
      if (child_speaks) {
        ResponseType r = kResponseTypes[rng.categorical(
            std::span<const double>(row.data(), row.size()))];
        current.push_back(child_response(r, interrupted));
        ++sampled;
      }
      flush(false);
    }
    flush(true);
  }
  return corpus;
}

}  // namespace fixtures
