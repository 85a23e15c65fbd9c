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

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "abasim/dialogue.hpp"
#include "abasim/errors.hpp"

namespace abasim {

// Transcripts travel as UTF-8 JSON Lines, one dialogue per line:
//
//   {"dialogue_id":"d1","topic":"buy fruit","child_id":"c1","turns":[
//     {"speaker":"doctor","segments":[{"strategy":"instruction","text":"..."}]},
//     {"speaker":"child","response_type":"relevant","text":"...","interrupted":false}]}
//
// The optional "entity_focused" flag is serialized only when true; key order
// is fixed so that serialize(parse(line)) is byte-identical for canonical
// records.

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key,
                                  const std::string& where) {
  const nlohmann::json& v = require_field(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline Dialogue dialogue_from_json(const nlohmann::json& record) {
  Dialogue d;
  d.dialogue_id = detail::require_string(record, "dialogue_id", "dialogue");
  const std::string where = "dialogue '" + d.dialogue_id + "'";
  d.topic = detail::require_string(record, "topic", where);
  d.child_id = detail::require_string(record, "child_id", where);
  if (auto it = record.find("entity_focused"); it != record.end()) {
    if (!it->is_boolean()) throw ParseError(where + ": entity_focused must be a boolean");
    d.entity_focused = it->get<bool>();
  }
  const nlohmann::json& turns = detail::require_field(record, "turns", where);
  if (!turns.is_array()) throw ParseError(where + ": turns must be an array");
  for (const auto& turn_json : turns) {
    std::string speaker = detail::require_string(turn_json, "speaker", where);
    if (speaker == "doctor") {
      DoctorTurn turn;
      const nlohmann::json& segments = detail::require_field(turn_json, "segments", where);
      if (!segments.is_array()) throw ParseError(where + ": segments must be an array");
      for (const auto& seg_json : segments) {
        DoctorSegment seg;
        std::string label = detail::require_string(seg_json, "strategy", where);
        auto strategy = parse_strategy_label(label);
        if (!strategy) throw ParseError(where + ": unknown strategy '" + label + "'");
        seg.strategy = *strategy;
        seg.text = detail::require_string(seg_json, "text", where);
        turn.segments.push_back(std::move(seg));
      }
      d.turns.emplace_back(std::move(turn));
    } else if (speaker == "child") {
      ChildTurn turn;
      std::string label = detail::require_string(turn_json, "response_type", where);
      auto response = parse_response_label(label);
      if (!response) throw ParseError(where + ": unknown response_type '" + label + "'");
      turn.response_type = *response;
      turn.text = detail::require_string(turn_json, "text", where);
      if (auto it = turn_json.find("interrupted"); it != turn_json.end()) {
        if (!it->is_boolean()) throw ParseError(where + ": interrupted must be a boolean");
        turn.interrupted = it->get<bool>();
      }
      d.turns.emplace_back(std::move(turn));
    } else {
      throw ParseError(where + ": unknown speaker '" + speaker + "'");
    }
  }
  return d;
}

inline nlohmann::ordered_json dialogue_to_json(const Dialogue& d) {
  nlohmann::ordered_json record;
  record["dialogue_id"] = d.dialogue_id;
  record["topic"] = d.topic;
  record["child_id"] = d.child_id;
  if (d.entity_focused) record["entity_focused"] = true;
  nlohmann::ordered_json turns = nlohmann::ordered_json::array();
  for (const Turn& turn : d.turns) {
    nlohmann::ordered_json turn_json;
    if (is_doctor_turn(turn)) {
      turn_json["speaker"] = "doctor";
      nlohmann::ordered_json segments = nlohmann::ordered_json::array();
      for (const DoctorSegment& seg : as_doctor(turn).segments) {
        segments.push_back({{"strategy", to_label(seg.strategy)}, {"text", seg.text}});
      }
      turn_json["segments"] = std::move(segments);
    } else {
      const ChildTurn& child = as_child(turn);
      turn_json["speaker"] = "child";
      turn_json["response_type"] = to_label(child.response_type);
      turn_json["text"] = child.text;
      turn_json["interrupted"] = child.interrupted;
    }
    turns.push_back(std::move(turn_json));
  }
  record["turns"] = std::move(turns);
  return record;
}

inline std::string serialize_dialogue(const Dialogue& d) { return dialogue_to_json(d).dump(); }

// Parses a JSON-lines corpus stream. Blank lines are skipped. A line that is
// not valid JSON raises ParseError tagged with its 1-based line number; a
// record that decodes but breaks a transcript rule raises ValidationError
// naming the dialogue and rule.
inline std::vector<Dialogue> parse_corpus(std::istream& in) {
  std::vector<Dialogue> dialogues;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded()) throw ParseError("record is not valid JSON", line_number);
    Dialogue d;
    try {
      d = dialogue_from_json(record);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_number);
    }
    validate_dialogue(d);
    dialogues.push_back(std::move(d));
  }
  return dialogues;
}

inline std::vector<Dialogue> parse_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open corpus file: " + path);
  return parse_corpus(in);
}

inline void write_corpus(std::ostream& out, const std::vector<Dialogue>& dialogues) {
  for (const Dialogue& d : dialogues) out << serialize_dialogue(d) << '\n';
}

inline void write_corpus_file(const std::string& path, const std::vector<Dialogue>& dialogues) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open output file: " + path);
  write_corpus(out, dialogues);
}

inline ChildProfile profile_from_json(const nlohmann::json& record) {
  ChildProfile p;
  p.child_id = detail::require_string(record, "child_id", "profile");
  const std::string where = "profile '" + p.child_id + "'";
  const nlohmann::json& age = detail::require_field(record, "age", where);
  if (!age.is_number()) throw ParseError(where + ": age must be a number");
  p.age = age.get<double>();
  p.gender = detail::require_string(record, "gender", where);
  const nlohmann::json& dev = detail::require_field(record, "language_dev_age", where);
  if (!dev.is_number()) throw ParseError(where + ": language_dev_age must be a number");
  p.language_dev_age = dev.get<double>();
  if (auto it = record.find("dialogue_ids"); it != record.end()) {
    if (!it->is_array()) throw ParseError(where + ": dialogue_ids must be an array");
    for (const auto& v : *it) p.dialogue_ids.push_back(v.get<std::string>());
  }
  return p;
}

inline std::string serialize_profile(const ChildProfile& p) {
  nlohmann::ordered_json record;
  record["child_id"] = p.child_id;
  record["age"] = p.age;
  record["gender"] = p.gender;
  record["language_dev_age"] = p.language_dev_age;
  record["dialogue_ids"] = p.dialogue_ids;
  return record.dump();
}

inline std::vector<ChildProfile> parse_profiles(std::istream& in) {
  std::vector<ChildProfile> profiles;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded()) throw ParseError("record is not valid JSON", line_number);
    ChildProfile p;
    try {
      p = profile_from_json(record);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_number);
    }
    validate_profile(p);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

inline std::vector<ChildProfile> parse_profiles_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open profiles file: " + path);
  return parse_profiles(in);
}

}  // namespace abasim
