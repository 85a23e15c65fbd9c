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
#include <vector>

#include "abasim/backend.hpp"
#include "abasim/dialogue.hpp"

namespace abasim {

inline std::string doctor_turn_text(const DoctorTurn& turn) {
  std::string text;
  for (std::size_t i = 0; i < turn.segments.size(); ++i) {
    if (i > 0) text += ' ';
    text += turn.segments[i].text;
  }
  return text;
}

inline std::string child_turn_text(const ChildTurn& turn) {
  return turn.text.empty() ? std::string(kNoResponseMarker) : turn.text;
}

// Transcript as chat messages: doctor speaks as assistant, child as user.
inline std::vector<ChatMessage> history_messages(const std::vector<Turn>& history) {
  std::vector<ChatMessage> messages;
  messages.reserve(history.size());
  for (const Turn& turn : history) {
    if (is_doctor_turn(turn)) {
      messages.push_back({"assistant", doctor_turn_text(as_doctor(turn))});
    } else {
      messages.push_back({"user", child_turn_text(as_child(turn))});
    }
  }
  return messages;
}

// Transcript as plain text for the {history} placeholder.
inline std::string history_text(const std::vector<Turn>& history) {
  std::string text;
  for (const Turn& turn : history) {
    if (is_doctor_turn(turn)) {
      text += "doctor: " + doctor_turn_text(as_doctor(turn));
    } else {
      text += "child: " + child_turn_text(as_child(turn));
    }
    text += '\n';
  }
  return text;
}

inline std::string profile_text(const ChildProfile& profile) {
  if (profile.child_id.empty()) return "unspecified";
  std::string text = "child_id=" + profile.child_id;
  if (profile.age > 0.0) text += "; age=" + std::to_string(profile.age);
  if (!profile.gender.empty()) text += "; gender=" + profile.gender;
  if (profile.language_dev_age > 0.0) {
    text += "; language_dev_age=" + std::to_string(profile.language_dev_age);
  }
  return text;
}

}  // namespace abasim
