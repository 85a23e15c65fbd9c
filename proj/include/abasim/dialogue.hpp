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

#include <string>
#include <variant>
#include <vector>

#include "abasim/errors.hpp"
#include "abasim/strategy.hpp"

namespace abasim {

// One strategy-labeled clause of a doctor utterance. Segments are the atomic
// actions: a turn like "Great job! What color is it?" splits into a
// Reinforcement segment and an Instruction segment.
struct DoctorSegment {
  Strategy strategy = Strategy::Other;
  std::string text;
};

struct DoctorTurn {
  std::vector<DoctorSegment> segments;
};

struct ChildTurn {
  ResponseType response_type = ResponseType::Relevant;
  std::string text;
  // True when the child spoke without a directive cue.
  bool interrupted = false;
};

using Turn = std::variant<DoctorTurn, ChildTurn>;

inline bool is_doctor_turn(const Turn& t) { return std::holds_alternative<DoctorTurn>(t); }
inline bool is_child_turn(const Turn& t) { return std::holds_alternative<ChildTurn>(t); }
inline const DoctorTurn& as_doctor(const Turn& t) { return std::get<DoctorTurn>(t); }
inline const ChildTurn& as_child(const Turn& t) { return std::get<ChildTurn>(t); }

inline Strategy final_strategy(const DoctorTurn& turn) {
  if (turn.segments.empty()) throw ArgumentError("doctor turn has no segments");
  return turn.segments.back().strategy;
}

// An annotated intervention session.
struct Dialogue {
  std::string dialogue_id;
  std::string topic;
  std::string child_id;
  // Marks sessions centered on a physical object (storybook, toy) that a
  // text-only pipeline cannot follow; set by annotation, honored by cleaning.
  bool entity_focused = false;
  std::vector<Turn> turns;
};

struct ChildProfile {
  std::string child_id;
  double age = 0.0;
  std::string gender;
  double language_dev_age = 0.0;
  std::vector<std::string> dialogue_ids;
};

// All doctor segment strategies of a dialogue in utterance order, the raw
// material for transition contexts and distribution statistics.
inline std::vector<Strategy> flatten_doctor_strategies(const Dialogue& dialogue) {
  std::vector<Strategy> flat;
  for (const Turn& turn : dialogue.turns) {
    if (!is_doctor_turn(turn)) continue;
    for (const DoctorSegment& seg : as_doctor(turn).segments) flat.push_back(seg.strategy);
  }
  return flat;
}

// Checks every structural rule of the transcript model and throws
// ValidationError naming the dialogue and the violated rule.
//
// Rules:
//   - at least one turn, and the first turn is the doctor's
//   - doctor turns have >= 1 segment; segments are non-empty and never Pause
//   - child text is empty exactly when the response type is Unresponsive
//   - no two consecutive child turns (consecutive doctor turns are legal)
//   - an interrupted child turn follows a doctor turn whose final segment is
//     non-directive (Reinforcement or Other)
inline void validate_dialogue(const Dialogue& dialogue) {
  const std::string& id = dialogue.dialogue_id;
  if (id.empty()) throw ValidationError(id, "dialogue_id", "must be non-empty");
  if (dialogue.turns.empty()) throw ValidationError(id, "non_empty", "dialogue has no turns");
  if (!is_doctor_turn(dialogue.turns.front())) {
    throw ValidationError(id, "first_turn_doctor", "first turn must be a doctor turn");
  }
  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    const Turn& turn = dialogue.turns[i];
    if (is_doctor_turn(turn)) {
      const DoctorTurn& doc = as_doctor(turn);
      if (doc.segments.empty()) {
        throw ValidationError(id, "doctor_turn_segments", "doctor turn has no segments");
      }
      for (const DoctorSegment& seg : doc.segments) {
        if (seg.strategy == Strategy::Pause) {
          throw ValidationError(id, "pause_in_transcript",
                                "pause is a control signal and never labels a segment");
        }
        if (seg.text.empty()) {
          throw ValidationError(id, "segment_text", "doctor segment text must be non-empty");
        }
      }
      continue;
    }
    const ChildTurn& child = as_child(turn);
    bool empty_text = child.text.empty();
    bool unresponsive = child.response_type == ResponseType::Unresponsive;
    if (empty_text != unresponsive) {
      throw ValidationError(id, "unresponsive_text",
                            "child text is empty iff response type is unresponsive");
    }
    if (i == 0 || is_child_turn(dialogue.turns[i - 1])) {
      throw ValidationError(id, "consecutive_child_turns",
                            "child turns must follow a doctor turn");
    }
    if (child.interrupted) {
      const DoctorTurn& prev = as_doctor(dialogue.turns[i - 1]);
      if (!is_non_directive(final_strategy(prev))) {
        throw ValidationError(id, "interrupt_context",
                              "interruption must follow a non-directive doctor turn");
      }
    }
  }
}

// Inclusion criterion: language developmental age above 24 months.
inline void validate_profile(const ChildProfile& profile) {
  if (profile.child_id.empty()) {
    throw ValidationError(profile.child_id, "child_id", "must be non-empty");
  }
  if (!(profile.language_dev_age > 2.0)) {
    throw ValidationError(profile.child_id, "language_dev_age",
                          "language developmental age must exceed 2.0 years");
  }
}

}  // namespace abasim
