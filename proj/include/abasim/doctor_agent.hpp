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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "abasim/backend.hpp"
#include "abasim/dialogue.hpp"
#include "abasim/prompt_context.hpp"

namespace abasim {

// The child-side input to one doctor turn: a real child turn with its
// annotated type (simulation mode), raw text without a type (clinical-assist
// mode), or the synthetic session-start marker before anyone has spoken.
struct ChildStimulus {
  std::string text;
  std::optional<ResponseType> known_type;
  bool session_start = false;

  static ChildStimulus start() { return {"", std::nullopt, true}; }
  static ChildStimulus from_turn(const ChildTurn& turn) {
    return {turn.text, turn.response_type, false};
  }
  static ChildStimulus from_text(std::string text) { return {std::move(text), std::nullopt, false}; }
};

// Record of one executed loop step. The terminating Pause decision is also a
// step, with empty act/correct fields.
struct TraceStep {
  ThinkOutcome think;
  std::string raw_text;
  std::string corrected_text;
  bool correct_triggered = false;
  bool forced = false;
};

struct PhaseLatency {
  double observe = 0.0;
  double think = 0.0;
  double act = 0.0;
  double correct = 0.0;
};

// Full record of one doctor turn: the observation, every loop step, and the
// assembled transcript turn.
//
// Invariants (enforced for any backend, adversarial ones included):
//   - the last step is Pause and no earlier step is
//   - non-Pause step strategies are pairwise distinct
//   - if Instruction appears, it is the last non-Pause step
//   - at most 6 steps (5 distinct strategies + the forced Pause)
struct TurnTrace {
  Observation observation;
  std::vector<TraceStep> steps;
  DoctorTurn final_turn;
  PhaseLatency latency;
};

struct TurnResult {
  DoctorTurn turn;
  TurnTrace trace;
};

// Anything that can produce a doctor turn for a session: the O-T-A-C agent
// in production, scripted stand-ins in tests. Implementations must tolerate
// concurrent take_turn calls from independent sessions.
class DoctorPolicy {
 public:
  virtual ~DoctorPolicy() = default;
  virtual TurnResult take_turn(const std::vector<Turn>& history, const ChildStimulus& stimulus,
                               const std::string& topic) = 0;
};

// A turn that failed mid-loop; the partial trace rides along.
class TurnError : public std::runtime_error {
 public:
  TurnError(const std::string& message, TurnTrace partial)
      : std::runtime_error(message), partial_(std::move(partial)) {}

  const TurnTrace& partial_trace() const { return partial_; }

 private:
  TurnTrace partial_;
};

inline constexpr std::size_t kMaxTurnSteps = 6;

// Internal consistency check over a completed trace.
inline void verify_trace(const TurnTrace& trace) {
  if (trace.steps.empty()) throw InternalError("trace has no steps");
  if (trace.steps.size() > kMaxTurnSteps) throw InternalError("trace exceeds step bound");
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    bool is_last = i + 1 == trace.steps.size();
    Strategy s = trace.steps[i].think.strategy;
    if (is_last != (s == Strategy::Pause)) {
      throw InternalError("pause must terminate the trace, exactly once");
    }
    if (s == Strategy::Instruction && i + 2 < trace.steps.size()) {
      throw InternalError("instruction must be the final non-pause step");
    }
    for (std::size_t j = i + 1; j + 1 < trace.steps.size(); ++j) {
      if (trace.steps[j].think.strategy == s) {
        throw InternalError("duplicate strategy within one turn");
      }
    }
  }
  if (trace.final_turn.segments.size() + 1 != trace.steps.size()) {
    throw InternalError("final turn does not mirror the executed steps");
  }
}

struct DoctorAgentConfig {
  GenerationParams reason_params{0.2, 512, std::nullopt};  // observe / think / correct
  GenerationParams act_params{0.7, 256, std::nullopt};
  // Simulation mode: the stimulus carries the ground-truth response type and
  // it overrides whatever the backend classified. Clinical-assist mode (raw
  // text input) leaves the backend's classification standing.
  bool override_observed_type = true;
};

// Executes the observe / think / act / correct loop, one transcript turn per
// invocation. The agent holds no cross-turn state; everything it knows
// arrives through the history it is handed.
class DoctorAgent : public DoctorPolicy {
 public:
  DoctorAgent(TextBackend& backend, const PromptLibrary& prompts, DoctorAgentConfig config = {})
      : backend_(&backend), prompts_(&prompts), config_(config) {}

  TurnResult take_turn(const std::vector<Turn>& history, const ChildStimulus& stimulus,
                       const std::string& topic) override {
    return run_turn(history, stimulus, topic);
  }

  Observation observe(const std::vector<Turn>& history, const ChildStimulus& stimulus,
                      const std::string& topic, PhaseLatency* latency = nullptr) {
    std::string child_text = stimulus.session_start
                                 ? std::string(kSessionStartMarker)
                                 : (stimulus.text.empty() ? std::string(kNoResponseMarker)
                                                          : stimulus.text);
    GenerationRequest request;
    request.phase = "observe";
    request.params = config_.reason_params;
    request.system_prompt = prompts_->render(
        "observe", {{"topic", topic}, {"history", history_text(history)},
                    {"child_text", child_text}});
    request.messages = history_messages(history);
    request.messages.push_back({"user", child_text});

    Observation observation = parse_with_one_retry(
        request, [](const std::string& text) { return parse_observation(text); }, latency,
        &PhaseLatency::observe);
    if (config_.override_observed_type && stimulus.known_type) {
      observation.response_type = *stimulus.known_type;
    }
    return observation;
  }

  struct ThinkResult {
    ThinkOutcome outcome;
    bool forced = false;
  };

  // Decides the next strategy. Deterministic overrides guarantee the loop
  // constraints no matter what the backend answers: an Instruction that was
  // just executed forces Pause without a call, and a duplicate proposal gets
  // one re-prompt before being forced to Pause.
  ThinkResult think(const Observation& observation, const std::vector<Turn>& history,
                    const std::vector<TraceStep>& past_steps, const std::string& topic,
                    PhaseLatency* latency = nullptr) {
    if (!past_steps.empty() && past_steps.back().think.strategy == Strategy::Instruction) {
      return {{Strategy::Pause, ""}, true};
    }
    GenerationRequest request = build_think_request(observation, history, past_steps, topic);

    std::optional<ThinkOutcome> outcome;
    bool reprompted = false;
    try {
      outcome = parse_think(complete_timed(request, latency, &PhaseLatency::think).text);
    } catch (const FormatError&) {
    } catch (const LabelError&) {
    }
    if (!outcome) {
      outcome = parse_think(
          complete_timed(with_retry_note(request), latency, &PhaseLatency::think).text);
      reprompted = true;
    }
    if (!is_duplicate(*outcome, past_steps)) return {*outcome, false};
    if (!reprompted) {
      try {
        ThinkOutcome second = parse_think(
            complete_timed(with_retry_note(request), latency, &PhaseLatency::think).text);
        if (!is_duplicate(second, past_steps)) return {second, false};
      } catch (const FormatError&) {
      } catch (const LabelError&) {
      }
    }
    return {{Strategy::Pause, outcome->cot}, true};
  }

  // Realizes a strategy as text; empty generations get one re-prompt.
  std::string act(Strategy strategy, const std::vector<Turn>& history, const std::string& topic,
                  PhaseLatency* latency = nullptr) {
    if (strategy == Strategy::Pause) throw ArgumentError("act requires a non-pause strategy");
    GenerationRequest request;
    request.phase = make_act_phase(strategy);
    request.params = config_.act_params;
    request.system_prompt = prompts_->render(
        request.phase, {{"topic", topic}, {"history", history_text(history)},
                        {"strategy", to_label(strategy)}});
    request.messages = history_messages(history);
    nlohmann::ordered_json marker;
    marker["strategy"] = to_label(strategy);
    request.messages.push_back({"user", marker.dump()});

    std::string text = trim(complete_timed(request, latency, &PhaseLatency::act).text);
    if (text.empty()) {
      text = trim(
          complete_timed(with_retry_note(request), latency, &PhaseLatency::act).text);
    }
    if (text.empty()) throw FormatError("empty generation for " + request.phase);
    return text;
  }

  struct CorrectionOutcome {
    std::string text;       // retained pieces joined by single spaces
    bool triggered = false; // output differs from the raw generation
    std::string raw_used;   // the generation the filter ran on
  };

  // Self-correction filter: the backend splits the generation into
  // strategy-tagged pieces and only pieces tagged with the target strategy
  // survive. Pieces that cannot be located inside the raw text (in order)
  // are discarded, so no invented content can pass through. A filter that
  // removes everything triggers one regeneration, then fails.
  CorrectionOutcome correct(const std::string& raw_text, Strategy strategy,
                            const std::vector<Turn>& history, const std::string& topic,
                            PhaseLatency* latency = nullptr) {
    if (strategy == Strategy::Pause) throw ArgumentError("correct requires a non-pause strategy");
    if (raw_text.empty()) throw ArgumentError("correct requires non-empty raw text");
    std::string filtered = filter_once(raw_text, strategy, latency);
    if (!filtered.empty()) {
      return {filtered, filtered != raw_text, raw_text};
    }
    std::string regenerated = act(strategy, history, topic, latency);
    filtered = filter_once(regenerated, strategy, latency);
    if (filtered.empty()) {
      throw FormatError("correction removed every segment, twice");
    }
    return {filtered, filtered != regenerated, regenerated};
  }

  // One full O-T-A-C turn. Think runs until Pause; every non-Pause decision
  // is acted and corrected into one transcript segment. A backend failure
  // mid-loop raises TurnError with the partial trace attached.
  TurnResult run_turn(const std::vector<Turn>& history, const ChildStimulus& stimulus,
                      const std::string& topic) {
    TurnTrace trace;
    try {
      trace.observation = observe(history, stimulus, topic, &trace.latency);
      while (true) {
        if (trace.steps.size() >= kMaxTurnSteps) {
          throw InternalError("think loop failed to terminate");
        }
        ThinkResult decision =
            think(trace.observation, history, trace.steps, topic, &trace.latency);
        if (decision.outcome.strategy == Strategy::Pause && trace.steps.empty()) {
          // A turn must say something: one forced re-think, then give up.
          decision = think(trace.observation, history, trace.steps, topic, &trace.latency);
          if (decision.outcome.strategy == Strategy::Pause) {
            throw FormatError("turn would produce no segments (pause proposed twice)");
          }
        }
        if (decision.outcome.strategy == Strategy::Pause) {
          trace.steps.push_back({decision.outcome, "", "", false, decision.forced});
          break;
        }
        std::string raw = act(decision.outcome.strategy, history, topic, &trace.latency);
        CorrectionOutcome corrected =
            correct(raw, decision.outcome.strategy, history, topic, &trace.latency);
        trace.steps.push_back({decision.outcome, corrected.raw_used, corrected.text,
                               corrected.triggered, decision.forced});
      }
    } catch (const BackendError& e) {
      throw TurnError(e.what(), trace);
    } catch (const FormatError& e) {
      throw TurnError(e.what(), trace);
    } catch (const LabelError& e) {
      throw TurnError(e.what(), trace);
    }
    DoctorTurn turn;
    for (const TraceStep& step : trace.steps) {
      if (step.think.strategy == Strategy::Pause) continue;
      turn.segments.push_back({step.think.strategy, step.corrected_text});
    }
    trace.final_turn = turn;
    verify_trace(trace);
    return {std::move(turn), std::move(trace)};
  }

 private:
  // Runs the request, parses the reply, and on a malformed reply re-prompts
  // exactly once before letting the failure escape.
  template <typename Parser>
  auto parse_with_one_retry(const GenerationRequest& request, Parser parse,
                            PhaseLatency* latency, double PhaseLatency::*slot)
      -> decltype(parse(std::string{})) {
    try {
      return parse(complete_timed(request, latency, slot).text);
    } catch (const FormatError&) {
    } catch (const LabelError&) {
    }
    return parse(complete_timed(with_retry_note(request), latency, slot).text);
  }

  static bool is_duplicate(const ThinkOutcome& outcome, const std::vector<TraceStep>& steps) {
    if (outcome.strategy == Strategy::Pause) return false;
    for (const TraceStep& step : steps) {
      if (step.think.strategy == outcome.strategy) return true;
    }
    return false;
  }

  GenerationRequest build_think_request(const Observation& observation,
                                        const std::vector<Turn>& history,
                                        const std::vector<TraceStep>& past_steps,
                                        const std::string& topic) const {
    std::string past_lines;
    nlohmann::ordered_json past_json = nlohmann::ordered_json::array();
    for (const TraceStep& step : past_steps) {
      past_lines += std::string(to_label(step.think.strategy)) + ": " + step.corrected_text + "\n";
      past_json.push_back(
          {{"strategy", to_label(step.think.strategy)}, {"text", step.corrected_text}});
    }
    nlohmann::ordered_json observation_json;
    observation_json["response_type"] = to_label(observation.response_type);
    observation_json["analysis"] = observation.analysis;
    observation_json["function_hypothesis"] = to_label(observation.function_hypothesis);
    observation_json["stress"] = to_label(observation.stress);
    observation_json["engagement"] = to_label(observation.engagement);

    GenerationRequest request;
    request.phase = "think";
    request.params = config_.reason_params;
    request.system_prompt = prompts_->render(
        "think", {{"topic", topic},
                  {"history", history_text(history)},
                  {"observation", observation_json.dump()},
                  {"past_steps", past_lines}});
    request.messages = history_messages(history);
    nlohmann::ordered_json payload;
    payload["observation"] = observation_json;
    payload["past"] = past_json;
    request.messages.push_back({"user", payload.dump()});
    return request;
  }

  std::string filter_once(const std::string& raw_text, Strategy strategy,
                          PhaseLatency* latency) {
    GenerationRequest request;
    request.phase = "correct";
    request.params = config_.reason_params;
    request.system_prompt = prompts_->render(
        "correct", {{"raw_text", raw_text}, {"strategy", to_label(strategy)}});
    nlohmann::ordered_json payload;
    payload["raw_text"] = raw_text;
    payload["strategy"] = to_label(strategy);
    request.messages.push_back({"user", payload.dump()});

    std::vector<TaggedPiece> pieces = parse_with_one_retry(
        request, [](const std::string& text) { return parse_correction(text); }, latency,
        &PhaseLatency::correct);
    // Keep target-tagged pieces that actually occur in the raw text, in
    // order; everything else is dropped.
    std::string joined;
    std::size_t cursor = 0;
    for (const TaggedPiece& piece : pieces) {
      std::string text = trim(piece.text);
      if (text.empty()) continue;
      std::size_t pos = raw_text.find(text, cursor);
      if (pos == std::string::npos) continue;
      cursor = pos + text.size();
      if (piece.strategy != strategy) continue;
      if (!joined.empty()) joined += ' ';
      joined += text;
    }
    return joined;
  }

  GenerationResponse complete_timed(const GenerationRequest& request, PhaseLatency* latency,
                                    double PhaseLatency::*slot) {
    GenerationResponse response = backend_->complete(request);
    if (latency) (*latency).*slot += response.latency_seconds;
    return response;
  }

  static GenerationRequest with_retry_note(GenerationRequest request) {
    request.messages.push_back({"user", kRetryNote});
    return request;
  }

  TextBackend* backend_;
  const PromptLibrary* prompts_;
  DoctorAgentConfig config_;
};

// Share of executed loop steps whose correction changed the generated text.
inline double correct_trigger_rate(std::span<const TurnTrace> traces) {
  std::uint64_t corrected_steps = 0;
  std::uint64_t triggered = 0;
  for (const TurnTrace& trace : traces) {
    for (const TraceStep& step : trace.steps) {
      if (step.think.strategy == Strategy::Pause) continue;
      ++corrected_steps;
      if (step.correct_triggered) ++triggered;
    }
  }
  if (corrected_steps == 0) return 0.0;
  return static_cast<double>(triggered) / static_cast<double>(corrected_steps);
}

// ---------------------------------------------------------------------------
// Trace serialization (JSON lines)

inline nlohmann::ordered_json trace_to_json(const TurnTrace& trace) {
  nlohmann::ordered_json j;
  j["observation"] = {{"response_type", to_label(trace.observation.response_type)},
                      {"analysis", trace.observation.analysis},
                      {"function_hypothesis", to_label(trace.observation.function_hypothesis)},
                      {"stress", to_label(trace.observation.stress)},
                      {"engagement", to_label(trace.observation.engagement)}};
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const TraceStep& step : trace.steps) {
    steps.push_back({{"strategy", to_label(step.think.strategy)},
                     {"cot", step.think.cot},
                     {"raw_text", step.raw_text},
                     {"corrected_text", step.corrected_text},
                     {"correct_triggered", step.correct_triggered},
                     {"forced", step.forced}});
  }
  j["steps"] = std::move(steps);
  nlohmann::ordered_json segments = nlohmann::ordered_json::array();
  for (const DoctorSegment& seg : trace.final_turn.segments) {
    segments.push_back({{"strategy", to_label(seg.strategy)}, {"text", seg.text}});
  }
  j["final_segments"] = std::move(segments);
  j["latency"] = {{"observe", trace.latency.observe},
                  {"think", trace.latency.think},
                  {"act", trace.latency.act},
                  {"correct", trace.latency.correct}};
  return j;
}

inline TurnTrace trace_from_json(const nlohmann::json& j) {
  TurnTrace trace;
  const auto& obs = j.at("observation");
  trace.observation.response_type = require_response_label(obs.at("response_type").get<std::string>());
  trace.observation.analysis = obs.at("analysis").get<std::string>();
  auto hypothesis = parse_hypothesis_label(obs.at("function_hypothesis").get<std::string>());
  if (!hypothesis) throw ParseError("bad function_hypothesis in trace");
  trace.observation.function_hypothesis = *hypothesis;
  auto stress = parse_level_label(obs.at("stress").get<std::string>());
  auto engagement = parse_level_label(obs.at("engagement").get<std::string>());
  if (!stress || !engagement) throw ParseError("bad level label in trace");
  trace.observation.stress = *stress;
  trace.observation.engagement = *engagement;
  for (const auto& step_json : j.at("steps")) {
    TraceStep step;
    step.think.strategy = require_strategy_label(step_json.at("strategy").get<std::string>());
    step.think.cot = step_json.at("cot").get<std::string>();
    step.raw_text = step_json.at("raw_text").get<std::string>();
    step.corrected_text = step_json.at("corrected_text").get<std::string>();
    step.correct_triggered = step_json.at("correct_triggered").get<bool>();
    step.forced = step_json.at("forced").get<bool>();
    trace.steps.push_back(std::move(step));
  }
  for (const auto& seg_json : j.at("final_segments")) {
    DoctorSegment seg;
    seg.strategy = require_strategy_label(seg_json.at("strategy").get<std::string>());
    seg.text = seg_json.at("text").get<std::string>();
    trace.final_turn.segments.push_back(std::move(seg));
  }
  const auto& latency = j.at("latency");
  trace.latency.observe = latency.at("observe").get<double>();
  trace.latency.think = latency.at("think").get<double>();
  trace.latency.act = latency.at("act").get<double>();
  trace.latency.correct = latency.at("correct").get<double>();
  return trace;
}

inline std::string serialize_trace(const TurnTrace& trace) { return trace_to_json(trace).dump(); }

inline std::vector<TurnTrace> parse_traces(std::istream& in) {
  std::vector<TurnTrace> traces;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("trace record is not valid JSON", line_number);
    try {
      traces.push_back(trace_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad trace record: ") + e.what(), line_number);
    }
  }
  return traces;
}

}  // namespace abasim
