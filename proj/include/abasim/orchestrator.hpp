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

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "abasim/behavior_model.hpp"
#include "abasim/child_agent.hpp"
#include "abasim/dialogue.hpp"
#include "abasim/doctor_agent.hpp"

namespace abasim {

struct SessionResult {
  Dialogue dialogue;
  std::vector<TurnTrace> traces;
  bool complete = false;
  std::string error;  // non-empty when the session aborted; dialogue is partial
};

// Runs one full synthetic session under the alternating protocol:
//   - the doctor takes a turn
//   - a directive final segment cues the child to respond
//   - a non-directive final segment opens the interruption gate: either the
//     child seizes the floor (interrupted = true) or the doctor continues
// The session ends once target_turns speaker turns exist, never between a
// directive cue and its response, so transcripts may run one turn long.
inline SessionResult synthesize_dialogue(DoctorPolicy& doctor, ChildAgent& child,
                                         const std::string& topic, int target_turns,
                                         std::uint64_t seed,
                                         std::string dialogue_id = "session") {
  if (target_turns < kMinSessionTurns || target_turns > kMaxSessionTurns) {
    throw ArgumentError("target_turns must lie in [5, 50]");
  }
  child.reseed(seed);
  SessionResult result;
  result.dialogue.dialogue_id = std::move(dialogue_id);
  result.dialogue.topic = topic;
  result.dialogue.child_id = child.child_id();
  std::vector<Strategy> strategy_history;
  std::optional<ChildTurn> last_child;
  while (static_cast<int>(result.dialogue.turns.size()) < target_turns) {
    ChildStimulus stimulus =
        last_child ? ChildStimulus::from_turn(*last_child) : ChildStimulus::start();
    TurnResult doctor_turn;
    try {
      doctor_turn = doctor.take_turn(result.dialogue.turns, stimulus, topic);
    } catch (const TurnError& e) {
      result.traces.push_back(e.partial_trace());
      result.error = e.what();
      return result;
    } catch (const BackendError& e) {
      result.error = e.what();
      return result;
    }
    result.dialogue.turns.emplace_back(doctor_turn.turn);
    result.traces.push_back(std::move(doctor_turn.trace));
    for (const DoctorSegment& seg : doctor_turn.turn.segments) {
      strategy_history.push_back(seg.strategy);
    }
    Strategy final = final_strategy(doctor_turn.turn);
    bool child_speaks = false;
    bool interrupted = false;
    if (is_directive(final)) {
      child_speaks = true;
    } else {
      interrupted = child.decide_interrupt(final);
      child_speaks = interrupted;
    }
    // When the doctor continues, the next observation still sees the most
    // recent child turn of the session.
    if (!child_speaks) continue;
    try {
      ResponseType type = child.sample_response_type(strategy_history);
      ChildTurn turn = child.generate_response(type, result.dialogue.turns);
      turn.interrupted = interrupted;
      result.dialogue.turns.emplace_back(turn);
      last_child = turn;
    } catch (const BackendError& e) {
      result.error = e.what();
      return result;
    } catch (const FormatError& e) {
      result.error = e.what();
      return result;
    }
  }
  validate_dialogue(result.dialogue);
  result.complete = true;
  return result;
}

namespace detail {
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  int n_threads = std::min<int>(workers, static_cast<int>(count));
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}
}  // namespace detail

// Synthesizes one session per reference dialogue with matching topic and
// turn budget (clamped into the [5, 50] support of the length model).
// Per-session seeds derive from (base_seed, reference index), so results do
// not depend on the worker count. The doctor policy and backend must accept
// concurrent calls when parallelism > 1.
inline std::vector<SessionResult> synthesize_matched(
    DoctorPolicy& doctor, const BehaviorModel& model, TextBackend& child_backend,
    const PromptLibrary& prompts, const std::vector<Dialogue>& reference,
    const std::map<std::string, ChildProfile>& profiles, std::uint64_t base_seed,
    int parallelism = 1, const std::string& id_prefix = "syn_") {
  if (reference.empty()) throw ArgumentError("reference corpus is empty");
  std::vector<SessionResult> results(reference.size());
  detail::parallel_for(reference.size(), parallelism, [&](std::size_t i) {
    const Dialogue& ref = reference[i];
    ChildProfile profile;
    if (auto it = profiles.find(ref.child_id); it != profiles.end()) profile = it->second;
    ChildAgent child(model, ref.child_id, profile, child_backend, prompts, ref.topic,
                     /*seed=*/0);
    int target = std::clamp(static_cast<int>(ref.turns.size()), kMinSessionTurns,
                            kMaxSessionTurns);
    results[i] = synthesize_dialogue(doctor, child, ref.topic, target,
                                     Rng::derive(base_seed, i), id_prefix + ref.dialogue_id);
  });
  return results;
}

struct PredictionPair {
  std::size_t position = 0;  // index of the reference turn within the dialogue
  DoctorTurn reference;
  std::optional<DoctorTurn> predicted;
  std::optional<TurnTrace> trace;
  std::string error;  // per-turn failure; remaining turns are still processed
};

// Turn-by-turn prediction on a real dialogue: for every doctor turn i the
// policy regenerates the turn from the real turns 0..i-1 (predictions never
// feed later windows, and no window may see turns at or past i).
inline std::vector<PredictionPair> sliding_window_predict(DoctorPolicy& doctor,
                                                          const Dialogue& real_dialogue) {
  std::vector<PredictionPair> pairs;
  for (std::size_t i = 0; i < real_dialogue.turns.size(); ++i) {
    if (!is_doctor_turn(real_dialogue.turns[i])) continue;
    PredictionPair pair;
    pair.position = i;
    pair.reference = as_doctor(real_dialogue.turns[i]);
    std::vector<Turn> history(real_dialogue.turns.begin(),
                              real_dialogue.turns.begin() + static_cast<std::ptrdiff_t>(i));
    ChildStimulus stimulus = ChildStimulus::start();
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
      if (is_child_turn(*it)) {
        stimulus = ChildStimulus::from_turn(as_child(*it));
        break;
      }
    }
    try {
      TurnResult result = doctor.take_turn(history, stimulus, real_dialogue.topic);
      pair.predicted = std::move(result.turn);
      pair.trace = std::move(result.trace);
    } catch (const TurnError& e) {
      pair.trace = e.partial_trace();
      pair.error = e.what();
    } catch (const BackendError& e) {
      pair.error = e.what();
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace abasim
