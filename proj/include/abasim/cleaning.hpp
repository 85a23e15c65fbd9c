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

#include <cstddef>
#include <string>
#include <vector>

#include "abasim/dialogue.hpp"
#include "abasim/text.hpp"

namespace abasim {

struct CleanOptions {
  // Personal names (and other sensitive tokens) are replaced with this.
  std::string replacement = "child";
  bool drop_entity_focused = true;
};

struct CleanReport {
  std::size_t input_count = 0;
  std::size_t removed_short = 0;
  std::size_t removed_entity_focused = 0;
  std::size_t substitutions = 0;
  std::size_t output_count = 0;
};

// Corpus cleaning: drops dialogues with fewer than min_turns speaker turns,
// drops entity-focused dialogues, and substitutes lexicon names in every
// utterance. Order is preserved; the operation is idempotent as long as the
// replacement token is not itself (part of) a lexicon entry.
inline std::vector<Dialogue> clean_corpus(const std::vector<Dialogue>& dialogues,
                                          std::size_t min_turns,
                                          const std::vector<std::string>& name_lexicon,
                                          const CleanOptions& options = {},
                                          CleanReport* report = nullptr) {
  if (min_turns < 1) throw ArgumentError("min_turns must be >= 1");
  CleanReport local;
  local.input_count = dialogues.size();

  auto scrub = [&](std::string text) {
    for (const std::string& name : name_lexicon) {
      if (name.empty()) continue;
      text = replace_all(std::move(text), name, options.replacement);
    }
    return text;
  };
  auto count_hits = [&](const std::string& text) {
    std::size_t hits = 0;
    for (const std::string& name : name_lexicon) {
      if (name.empty()) continue;
      std::size_t pos = 0;
      while ((pos = text.find(name, pos)) != std::string::npos) {
        ++hits;
        pos += name.size();
      }
    }
    return hits;
  };

  std::vector<Dialogue> cleaned;
  cleaned.reserve(dialogues.size());
  for (const Dialogue& original : dialogues) {
    if (original.turns.size() < min_turns) {
      ++local.removed_short;
      continue;
    }
    if (options.drop_entity_focused && original.entity_focused) {
      ++local.removed_entity_focused;
      continue;
    }
    Dialogue d = original;
    for (Turn& turn : d.turns) {
      if (is_doctor_turn(turn)) {
        for (DoctorSegment& seg : std::get<DoctorTurn>(turn).segments) {
          local.substitutions += count_hits(seg.text);
          seg.text = scrub(std::move(seg.text));
        }
      } else {
        ChildTurn& child = std::get<ChildTurn>(turn);
        local.substitutions += count_hits(child.text);
        child.text = scrub(std::move(child.text));
      }
    }
    cleaned.push_back(std::move(d));
  }
  local.output_count = cleaned.size();
  if (report) *report = local;
  return cleaned;
}

}  // namespace abasim
