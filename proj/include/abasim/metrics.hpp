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
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "abasim/corpus_stats.hpp"
#include "abasim/dialogue.hpp"
#include "abasim/text.hpp"

namespace abasim {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline PRF make_prf(double overlap, double pred_size, double ref_size) {
  PRF out;
  out.precision = pred_size > 0.0 ? overlap / pred_size : 0.0;
  out.recall = ref_size > 0.0 ? overlap / ref_size : 0.0;
  double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

// Order-free sequence agreement: the multiset intersection size measures
// whether the right strategies were chosen, regardless of when.
template <typename T>
PRF multiset_prf(const std::vector<T>& pred, const std::vector<T>& ref) {
  std::map<T, std::int64_t> pred_counts;
  std::map<T, std::int64_t> ref_counts;
  for (const T& x : pred) ++pred_counts[x];
  for (const T& x : ref) ++ref_counts[x];
  std::int64_t overlap = 0;
  for (const auto& [value, count] : pred_counts) {
    auto it = ref_counts.find(value);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  return make_prf(static_cast<double>(overlap), static_cast<double>(pred.size()),
                  static_cast<double>(ref.size()));
}

template <typename T>
std::size_t lcs_length(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> previous(b.size() + 1, 0);
  std::vector<std::size_t> current(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        current[j] = previous[j - 1] + 1;
      } else {
        current[j] = std::max(previous[j], current[j - 1]);
      }
    }
    std::swap(previous, current);
  }
  return previous[b.size()];
}

// Order-aware sequence agreement via the longest common subsequence.
template <typename T>
PRF lcs_prf(const std::vector<T>& pred, const std::vector<T>& ref) {
  auto match = static_cast<double>(lcs_length(pred, ref));
  return make_prf(match, static_cast<double>(pred.size()), static_cast<double>(ref.size()));
}

// KL(P||Q) with both inputs epsilon-smoothed and renormalized; without the
// smoothing the raw definition blows up whenever Q misses support that P
// has. Natural log by default; pass log_base = 2 for bits.
inline double kl_divergence(std::span<const double> p, std::span<const double> q,
                            double epsilon = 1e-9, double log_base = 0.0) {
  if (p.size() != q.size()) throw ArgumentError("distributions live on different alphabets");
  if (p.empty()) throw ArgumentError("empty distribution");
  if (epsilon < 0.0) throw ArgumentError("epsilon must be >= 0");
  double p_total = 0.0;
  double q_total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p_total += p[i] + epsilon;
    q_total += q[i] + epsilon;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double pi = (p[i] + epsilon) / p_total;
    double qi = (q[i] + epsilon) / q_total;
    if (pi > 0.0) sum += pi * std::log(pi / qi);
  }
  if (log_base > 0.0) sum /= std::log(log_base);
  return sum;
}

// Jensen-Shannon divergence in base 2, so the value lives in [0, 1].
// Finite by construction (the mixture covers every supported outcome), so
// no smoothing is applied.
inline double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("distributions live on different alphabets");
  if (p.empty()) throw ArgumentError("empty distribution");
  auto kl2_to_mixture = [&](std::span<const double> a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double mi = 0.5 * (p[i] + q[i]);
      if (a[i] > 0.0) sum += a[i] * std::log2(a[i] / mi);
    }
    return sum;
  };
  return 0.5 * kl2_to_mixture(p) + 0.5 * kl2_to_mixture(q);
}

// Vocabulary richness: unique n-grams over total n-grams, pooled across all
// token sequences. 0 when no n-grams exist.
inline double distinct_n(const std::vector<std::vector<std::string>>& token_sequences, int n) {
  if (n < 1) throw ArgumentError("n must be >= 1");
  std::map<std::vector<std::string>, std::uint64_t> grams;
  std::uint64_t total = 0;
  for (const auto& tokens : token_sequences) {
    if (tokens.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      std::vector<std::string> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i) + n);
      ++grams[std::move(gram)];
      ++total;
    }
  }
  if (total == 0) return 0.0;
  return static_cast<double>(grams.size()) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Corpus-level reports

struct DivergenceOptions {
  double epsilon = 1e-9;
  Tokenization tokenization = Tokenization::Characters;
  // Pooled by default: distributions are computed over all segments at once.
  // The per-dialogue variant averages per-dialogue distributions instead.
  bool per_dialogue = false;
};

struct SpeakerDiversity {
  double distinct2 = 0.0;
  double distinct3 = 0.0;
};

struct DivergenceReport {
  StrategyDistribution real_strategy{};
  StrategyDistribution candidate_strategy{};
  ResponseDistribution real_response{};
  ResponseDistribution candidate_response{};
  double strategy_kl = 0.0;
  double strategy_js = 0.0;
  double response_kl = 0.0;
  double response_js = 0.0;
  SpeakerDiversity real_doctor, real_child, candidate_doctor, candidate_child;
};

namespace detail {

inline StrategyDistribution mean_strategy_distribution(const std::vector<Dialogue>& corpus) {
  StrategyDistribution mean{};
  std::size_t used = 0;
  for (const Dialogue& d : corpus) {
    try {
      StrategyDistribution dist = strategy_distribution({d});
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += dist[i];
      ++used;
    } catch (const ArgumentError&) {
      // dialogue without doctor segments cannot happen in validated corpora
    }
  }
  if (used == 0) throw ArgumentError("no doctor segments in corpus");
  for (double& v : mean) v /= static_cast<double>(used);
  return mean;
}

inline ResponseDistribution mean_response_distribution(const std::vector<Dialogue>& corpus) {
  ResponseDistribution mean{};
  std::size_t used = 0;
  for (const Dialogue& d : corpus) {
    try {
      ResponseDistribution dist = response_distribution({d});
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += dist[i];
      ++used;
    } catch (const ArgumentError&) {
    }
  }
  if (used == 0) throw ArgumentError("no child turns in corpus");
  for (double& v : mean) v /= static_cast<double>(used);
  return mean;
}

inline SpeakerDiversity speaker_diversity(const std::vector<std::vector<std::string>>& texts) {
  SpeakerDiversity out;
  out.distinct2 = distinct_n(texts, 2);
  out.distinct3 = distinct_n(texts, 3);
  return out;
}

inline std::vector<std::vector<std::string>> doctor_token_sequences(
    const std::vector<Dialogue>& corpus, Tokenization mode) {
  std::vector<std::vector<std::string>> out;
  for (const Dialogue& d : corpus) {
    for (const Turn& turn : d.turns) {
      if (!is_doctor_turn(turn)) continue;
      for (const DoctorSegment& seg : as_doctor(turn).segments) {
        out.push_back(tokenize(seg.text, mode));
      }
    }
  }
  return out;
}

inline std::vector<std::vector<std::string>> child_token_sequences(
    const std::vector<Dialogue>& corpus, Tokenization mode) {
  std::vector<std::vector<std::string>> out;
  for (const Dialogue& d : corpus) {
    for (const Turn& turn : d.turns) {
      if (!is_child_turn(turn)) continue;
      const ChildTurn& child = as_child(turn);
      if (child.text.empty()) continue;
      out.push_back(tokenize(child.text, mode));
    }
  }
  return out;
}

}  // namespace detail

// Distribution drift between a real corpus and a synthetic one: KL / JS over
// strategy and response-type usage, plus distinct-2/3 per speaker.
inline DivergenceReport corpus_divergence_report(const std::vector<Dialogue>& real,
                                                 const std::vector<Dialogue>& candidate,
                                                 const DivergenceOptions& options = {}) {
  if (real.empty() || candidate.empty()) throw ArgumentError("both corpora must be non-empty");
  DivergenceReport report;
  if (options.per_dialogue) {
    report.real_strategy = detail::mean_strategy_distribution(real);
    report.candidate_strategy = detail::mean_strategy_distribution(candidate);
    report.real_response = detail::mean_response_distribution(real);
    report.candidate_response = detail::mean_response_distribution(candidate);
  } else {
    report.real_strategy = strategy_distribution(real);
    report.candidate_strategy = strategy_distribution(candidate);
    report.real_response = response_distribution(real);
    report.candidate_response = response_distribution(candidate);
  }
  report.strategy_kl =
      kl_divergence(report.real_strategy, report.candidate_strategy, options.epsilon);
  report.strategy_js = js_divergence(report.real_strategy, report.candidate_strategy);
  report.response_kl =
      kl_divergence(report.real_response, report.candidate_response, options.epsilon);
  report.response_js = js_divergence(report.real_response, report.candidate_response);
  report.real_doctor = detail::speaker_diversity(
      detail::doctor_token_sequences(real, options.tokenization));
  report.real_child =
      detail::speaker_diversity(detail::child_token_sequences(real, options.tokenization));
  report.candidate_doctor = detail::speaker_diversity(
      detail::doctor_token_sequences(candidate, options.tokenization));
  report.candidate_child = detail::speaker_diversity(
      detail::child_token_sequences(candidate, options.tokenization));
  return report;
}

struct ConsistencyReport {
  PRF multiset;
  PRF lcs;
  std::size_t turn_pairs = 0;
};

// Micro-averaged strategy agreement over (predicted, reference) turn pairs:
// overlaps and lengths are summed across turns before dividing.
inline ConsistencyReport strategy_consistency_report(
    const std::vector<std::pair<std::vector<Strategy>, std::vector<Strategy>>>& pairs) {
  if (pairs.empty()) throw ArgumentError("no prediction pairs to evaluate");
  double multiset_overlap = 0.0;
  double lcs_match = 0.0;
  double pred_total = 0.0;
  double ref_total = 0.0;
  for (const auto& [pred, ref] : pairs) {
    std::map<Strategy, std::int64_t> pred_counts;
    std::map<Strategy, std::int64_t> ref_counts;
    for (Strategy s : pred) ++pred_counts[s];
    for (Strategy s : ref) ++ref_counts[s];
    for (const auto& [value, count] : pred_counts) {
      auto it = ref_counts.find(value);
      if (it != ref_counts.end()) {
        multiset_overlap += static_cast<double>(std::min(count, it->second));
      }
    }
    lcs_match += static_cast<double>(lcs_length(pred, ref));
    pred_total += static_cast<double>(pred.size());
    ref_total += static_cast<double>(ref.size());
  }
  ConsistencyReport report;
  report.turn_pairs = pairs.size();
  report.multiset = make_prf(multiset_overlap, pred_total, ref_total);
  report.lcs = make_prf(lcs_match, pred_total, ref_total);
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering

inline nlohmann::ordered_json divergence_report_to_json(const DivergenceReport& report) {
  auto strategy_obj = [](const StrategyDistribution& dist) {
    nlohmann::ordered_json j;
    for (Strategy s : kSegmentStrategies) j[to_label(s)] = dist[strategy_index(s)];
    return j;
  };
  auto response_obj = [](const ResponseDistribution& dist) {
    nlohmann::ordered_json j;
    for (ResponseType r : kResponseTypes) j[to_label(r)] = dist[response_index(r)];
    return j;
  };
  nlohmann::ordered_json j;
  j["strategy"] = {{"real", strategy_obj(report.real_strategy)},
                   {"candidate", strategy_obj(report.candidate_strategy)},
                   {"kl", report.strategy_kl},
                   {"js", report.strategy_js}};
  j["response"] = {{"real", response_obj(report.real_response)},
                   {"candidate", response_obj(report.candidate_response)},
                   {"kl", report.response_kl},
                   {"js", report.response_js}};
  j["distinct"] = {
      {"real", {{"doctor_2", report.real_doctor.distinct2},
                {"doctor_3", report.real_doctor.distinct3},
                {"child_2", report.real_child.distinct2},
                {"child_3", report.real_child.distinct3}}},
      {"candidate", {{"doctor_2", report.candidate_doctor.distinct2},
                     {"doctor_3", report.candidate_doctor.distinct3},
                     {"child_2", report.candidate_child.distinct2},
                     {"child_3", report.candidate_child.distinct3}}}};
  return j;
}

inline std::string divergence_report_to_table(const DivergenceReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(18) << "strategy" << std::right << std::setw(10) << "real"
      << std::setw(10) << "cand" << '\n';
  for (Strategy s : kSegmentStrategies) {
    out << std::left << std::setw(18) << to_label(s) << std::right << std::setw(10)
        << report.real_strategy[strategy_index(s)] << std::setw(10)
        << report.candidate_strategy[strategy_index(s)] << '\n';
  }
  out << std::left << std::setw(18) << "kl/js" << std::right << std::setw(10)
      << report.strategy_kl << std::setw(10) << report.strategy_js << '\n';
  out << '\n';
  out << std::left << std::setw(18) << "response" << std::right << std::setw(10) << "real"
      << std::setw(10) << "cand" << '\n';
  for (ResponseType r : kResponseTypes) {
    out << std::left << std::setw(18) << to_label(r) << std::right << std::setw(10)
        << report.real_response[response_index(r)] << std::setw(10)
        << report.candidate_response[response_index(r)] << '\n';
  }
  out << std::left << std::setw(18) << "kl/js" << std::right << std::setw(10)
      << report.response_kl << std::setw(10) << report.response_js << '\n';
  return out.str();
}

inline nlohmann::ordered_json consistency_report_to_json(const ConsistencyReport& report) {
  nlohmann::ordered_json j;
  j["turn_pairs"] = report.turn_pairs;
  j["multiset"] = {{"precision", report.multiset.precision},
                   {"recall", report.multiset.recall},
                   {"f1", report.multiset.f1}};
  j["lcs"] = {{"precision", report.lcs.precision},
              {"recall", report.lcs.recall},
              {"f1", report.lcs.f1}};
  return j;
}

inline std::string consistency_report_to_table(const ConsistencyReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(10) << "metric" << std::right << std::setw(12) << "precision"
      << std::setw(12) << "recall" << std::setw(12) << "f1" << '\n';
  out << std::left << std::setw(10) << "multiset" << std::right << std::setw(12)
      << report.multiset.precision << std::setw(12) << report.multiset.recall << std::setw(12)
      << report.multiset.f1 << '\n';
  out << std::left << std::setw(10) << "lcs" << std::right << std::setw(12)
      << report.lcs.precision << std::setw(12) << report.lcs.recall << std::setw(12)
      << report.lcs.f1 << '\n';
  return out.str();
}

}  // namespace abasim
