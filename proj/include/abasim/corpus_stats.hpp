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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "abasim/dialogue.hpp"
#include "abasim/rng.hpp"
#include "abasim/text.hpp"

namespace abasim {

using StrategyDistribution = std::array<double, kSegmentStrategyCount>;
using ResponseDistribution = std::array<double, kResponseTypeCount>;

// Empirical distribution of doctor segment strategies, pooled over the corpus.
inline StrategyDistribution strategy_distribution(const std::vector<Dialogue>& dialogues) {
  std::array<std::uint64_t, kSegmentStrategyCount> counts{};
  std::uint64_t total = 0;
  for (const Dialogue& d : dialogues) {
    for (const Turn& turn : d.turns) {
      if (!is_doctor_turn(turn)) continue;
      for (const DoctorSegment& seg : as_doctor(turn).segments) {
        ++counts[strategy_index(seg.strategy)];
        ++total;
      }
    }
  }
  if (total == 0) throw ArgumentError("no doctor segments in corpus");
  StrategyDistribution dist{};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    dist[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return dist;
}

inline ResponseDistribution response_distribution(const std::vector<Dialogue>& dialogues) {
  std::array<std::uint64_t, kResponseTypeCount> counts{};
  std::uint64_t total = 0;
  for (const Dialogue& d : dialogues) {
    for (const Turn& turn : d.turns) {
      if (!is_child_turn(turn)) continue;
      ++counts[response_index(as_child(turn).response_type)];
      ++total;
    }
  }
  if (total == 0) throw ArgumentError("no child turns in corpus");
  ResponseDistribution dist{};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    dist[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return dist;
}

struct SplitResult {
  std::vector<Dialogue> train;
  std::vector<Dialogue> test;
};

// Stratified split: within each topic, round(test_fraction * size) dialogues
// go to the test side. Deterministic under the seed regardless of topic
// iteration order (each topic derives its own stream from the seed).
inline SplitResult split_stratified(
    const std::vector<Dialogue>& dialogues, double test_fraction, std::uint64_t seed,
    const std::function<std::string(const Dialogue&)>& topic_key =
        [](const Dialogue& d) { return d.topic; }) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test_fraction must lie strictly between 0 and 1");
  }
  std::map<std::string, std::vector<std::size_t>> by_topic;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    by_topic[topic_key(dialogues[i])].push_back(i);
  }
  std::vector<bool> in_test(dialogues.size(), false);
  for (auto& [topic, indices] : by_topic) {
    std::uint64_t topic_hash = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : topic) {
      topic_hash ^= c;
      topic_hash *= 1099511628211ULL;
    }
    Rng rng(Rng::derive(seed, topic_hash));
    rng.shuffle(std::span<std::size_t>(indices));
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(indices.size())));
    n_test = std::min(n_test, indices.size());
    for (std::size_t j = 0; j < n_test; ++j) in_test[indices[j]] = true;
  }
  SplitResult result;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    (in_test[i] ? result.test : result.train).push_back(dialogues[i]);
  }
  return result;
}

struct SummaryStat {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by N)
  std::uint64_t count = 0;
};

inline SummaryStat summarize(std::span<const double> values) {
  SummaryStat s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

struct CorpusStats {
  std::uint64_t dialogue_count = 0;
  SummaryStat turns_per_dialogue;  // speaker turns, doctor and child alike
  SummaryStat doctor_utterance_chars;  // one utterance = one segment
  SummaryStat child_utterance_chars;
  std::map<Strategy, SummaryStat> doctor_by_strategy;
  std::map<ResponseType, SummaryStat> child_by_type;
};

inline CorpusStats dialogue_stats(const std::vector<Dialogue>& dialogues) {
  if (dialogues.empty()) throw ArgumentError("empty corpus");
  CorpusStats stats;
  stats.dialogue_count = dialogues.size();
  std::vector<double> turns;
  std::vector<double> doctor_lengths;
  std::vector<double> child_lengths;
  std::map<Strategy, std::vector<double>> by_strategy;
  std::map<ResponseType, std::vector<double>> by_type;
  for (const Dialogue& d : dialogues) {
    turns.push_back(static_cast<double>(d.turns.size()));
    for (const Turn& turn : d.turns) {
      if (is_doctor_turn(turn)) {
        for (const DoctorSegment& seg : as_doctor(turn).segments) {
          double len = static_cast<double>(utf8_length(seg.text));
          doctor_lengths.push_back(len);
          by_strategy[seg.strategy].push_back(len);
        }
      } else {
        const ChildTurn& child = as_child(turn);
        double len = static_cast<double>(utf8_length(child.text));
        child_lengths.push_back(len);
        by_type[child.response_type].push_back(len);
      }
    }
  }
  stats.turns_per_dialogue = summarize(turns);
  stats.doctor_utterance_chars = summarize(doctor_lengths);
  stats.child_utterance_chars = summarize(child_lengths);
  for (auto& [strategy, lengths] : by_strategy) {
    stats.doctor_by_strategy[strategy] = summarize(lengths);
  }
  for (auto& [type, lengths] : by_type) {
    stats.child_by_type[type] = summarize(lengths);
  }
  return stats;
}

}  // namespace abasim
