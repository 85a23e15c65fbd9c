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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "abasim/corpus_stats.hpp"
#include "abasim/dialogue.hpp"
#include "abasim/rng.hpp"

namespace abasim {

using ResponseCounts = std::array<std::uint64_t, kResponseTypeCount>;

// Raw transition tallies extracted from annotated dialogues. Contexts are
// sequences of doctor segment strategies (most recent last); they accumulate
// across turns within a dialogue and reset at dialogue boundaries.
struct TransitionStats {
  int k = 2;
  std::map<std::vector<Strategy>, ResponseCounts> seq_counts;
  std::array<ResponseCounts, kSegmentStrategyCount> last_counts{};
  std::uint64_t interruptions = 0;
  std::uint64_t interrupt_opportunities = 0;
  ResponseCounts response_marginal{};

  std::uint64_t context_count(std::span<const Strategy> ctx) const {
    auto it = seq_counts.find(std::vector<Strategy>(ctx.begin(), ctx.end()));
    if (it == seq_counts.end()) return 0;
    std::uint64_t total = 0;
    for (std::uint64_t c : it->second) total += c;
    return total;
  }

  std::uint64_t last_total(Strategy s) const {
    std::uint64_t total = 0;
    for (std::uint64_t c : last_counts[strategy_index(s)]) total += c;
    return total;
  }

  std::uint64_t child_turn_count() const {
    std::uint64_t total = 0;
    for (std::uint64_t c : response_marginal) total += c;
    return total;
  }
};

// Tallies strategy-context -> response transitions over a corpus. For every
// child turn, the suffixes of length 1..k of the flattened doctor strategy
// history feed seq_counts, and the single most recent strategy feeds
// last_counts. Interruption opportunities are doctor turns ending in a
// non-directive segment; an opportunity converts when an interrupted child
// turn follows.
inline TransitionStats fit_stats(const std::vector<Dialogue>& dialogues, int k) {
  if (k < 1) throw ArgumentError("n-gram order k must be >= 1");
  TransitionStats stats;
  stats.k = k;
  for (const Dialogue& d : dialogues) {
    std::vector<Strategy> history;
    for (std::size_t i = 0; i < d.turns.size(); ++i) {
      const Turn& turn = d.turns[i];
      if (is_doctor_turn(turn)) {
        const DoctorTurn& doc = as_doctor(turn);
        for (const DoctorSegment& seg : doc.segments) history.push_back(seg.strategy);
        if (is_non_directive(final_strategy(doc))) {
          ++stats.interrupt_opportunities;
          if (i + 1 < d.turns.size() && is_child_turn(d.turns[i + 1]) &&
              as_child(d.turns[i + 1]).interrupted) {
            ++stats.interruptions;
          }
        }
        continue;
      }
      const ChildTurn& child = as_child(turn);
      ++stats.response_marginal[response_index(child.response_type)];
      if (history.empty()) continue;
      std::size_t max_len = std::min<std::size_t>(history.size(), static_cast<std::size_t>(k));
      for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Strategy> ctx(history.end() - static_cast<std::ptrdiff_t>(len),
                                  history.end());
        ++stats.seq_counts[std::move(ctx)][response_index(child.response_type)];
      }
      ++stats.last_counts[strategy_index(history.back())][response_index(child.response_type)];
    }
  }
  return stats;
}

// Add-lambda smoothed conditional P(response | last strategy). Smoothing
// keeps unseen contexts defined: a never-observed strategy yields uniform.
inline ResponseDistribution p_last(const TransitionStats& stats, Strategy s, double lambda) {
  if (lambda <= 0.0) throw ArgumentError("smoothing lambda must be > 0");
  const ResponseCounts& counts = stats.last_counts[strategy_index(s)];
  double total = static_cast<double>(stats.last_total(s));
  ResponseDistribution dist{};
  double denom = total + lambda * static_cast<double>(kResponseTypeCount);
  for (std::size_t r = 0; r < kResponseTypeCount; ++r) {
    dist[r] = (static_cast<double>(counts[r]) + lambda) / denom;
  }
  return dist;
}

// Add-lambda smoothed conditional P(response | exact strategy context).
inline ResponseDistribution p_seq(const TransitionStats& stats, std::span<const Strategy> ctx,
                                  double lambda) {
  if (lambda <= 0.0) throw ArgumentError("smoothing lambda must be > 0");
  if (ctx.empty() || ctx.size() > static_cast<std::size_t>(stats.k)) {
    throw ArgumentError("context length must lie in [1, k]");
  }
  ResponseCounts counts{};
  auto it = stats.seq_counts.find(std::vector<Strategy>(ctx.begin(), ctx.end()));
  if (it != stats.seq_counts.end()) counts = it->second;
  double total = 0.0;
  for (std::uint64_t c : counts) total += static_cast<double>(c);
  ResponseDistribution dist{};
  double denom = total + lambda * static_cast<double>(kResponseTypeCount);
  for (std::size_t r = 0; r < kResponseTypeCount; ++r) {
    dist[r] = (static_cast<double>(counts[r]) + lambda) / denom;
  }
  return dist;
}

// Empirical interruption probability after non-directive doctor turns.
inline double p_interrupt(const TransitionStats& stats) {
  if (stats.interrupt_opportunities == 0) return 0.0;
  return static_cast<double>(stats.interruptions) /
         static_cast<double>(stats.interrupt_opportunities);
}

namespace detail {
inline void check_normalized(std::span<const double> v, const char* name) {
  double sum = 0.0;
  for (double x : v) {
    if (x < 0.0) throw ArgumentError(std::string(name) + " has a negative entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ArgumentError(std::string(name) + " does not sum to 1");
  }
}
}  // namespace detail

// Convex interpolation between a child-specific distribution and the
// population distribution. alpha = 0 keeps the personal estimate, alpha = 1
// the global one.
inline ResponseDistribution blend(const ResponseDistribution& personal,
                                  const ResponseDistribution& global, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must lie in [0,1]");
  detail::check_normalized(personal, "personal distribution");
  detail::check_normalized(global, "global distribution");
  ResponseDistribution out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - alpha) * personal[i] + alpha * global[i];
  }
  return out;
}

inline double blend_scalar(double personal, double global, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must lie in [0,1]");
  return (1.0 - alpha) * personal + alpha * global;
}

// Fitted child simulator parameters: global tables, per-child tables, the
// personal/global blending weight, and a log-normal session-length model.
struct BehaviorModel {
  int k = 2;
  double alpha = 0.3;
  double smoothing_lambda = 0.5;
  std::uint64_t backoff_threshold = 3;
  double length_mu = 0.0;
  double length_sigma = 0.0;
  TransitionStats global;
  std::map<std::string, TransitionStats> personal;

  const TransitionStats* personal_stats(const std::string& child_id) const {
    auto it = personal.find(child_id);
    return it == personal.end() ? nullptr : &it->second;
  }
};

struct FitOptions {
  int k = 2;
  double alpha = 0.3;
  double smoothing_lambda = 0.5;
  std::uint64_t backoff_threshold = 3;
};

// Log-normal session-length fit: MLE of the underlying normal on ln(turns).
// The standard deviation is the population estimate (divide by N); a single
// dialogue fits with sigma = 0.
inline std::pair<double, double> fit_length(const std::vector<Dialogue>& dialogues) {
  if (dialogues.empty()) throw ArgumentError("empty corpus");
  std::vector<double> logs;
  logs.reserve(dialogues.size());
  for (const Dialogue& d : dialogues) {
    if (d.turns.empty()) throw ArgumentError("dialogue with zero turns");
    logs.push_back(std::log(static_cast<double>(d.turns.size())));
  }
  SummaryStat s = summarize(logs);
  return {s.mean, s.stddev};
}

inline constexpr int kMinSessionTurns = 5;
inline constexpr int kMaxSessionTurns = 50;

// Draws a synthetic session length: round the log-normal draw, then clip
// into [5, 50]. sigma = 0 degenerates to a fixed length.
inline int sample_length(double mu, double sigma, Rng& rng) {
  if (sigma < 0.0) throw ArgumentError("sigma must be >= 0");
  double raw = std::exp(mu + sigma * rng.normal());
  auto rounded = static_cast<long long>(std::llround(raw));
  return static_cast<int>(
      std::clamp<long long>(rounded, kMinSessionTurns, kMaxSessionTurns));
}

inline BehaviorModel fit_model(const std::vector<Dialogue>& dialogues,
                               const FitOptions& options = {}) {
  if (options.alpha < 0.0 || options.alpha > 1.0) throw ArgumentError("alpha must lie in [0,1]");
  if (options.smoothing_lambda <= 0.0) throw ArgumentError("smoothing lambda must be > 0");
  BehaviorModel model;
  model.k = options.k;
  model.alpha = options.alpha;
  model.smoothing_lambda = options.smoothing_lambda;
  model.backoff_threshold = options.backoff_threshold;
  model.global = fit_stats(dialogues, options.k);
  std::map<std::string, std::vector<Dialogue>> by_child;
  for (const Dialogue& d : dialogues) by_child[d.child_id].push_back(d);
  for (const auto& [child_id, child_dialogues] : by_child) {
    model.personal[child_id] = fit_stats(child_dialogues, options.k);
  }
  auto [mu, sigma] = fit_length(dialogues);
  model.length_mu = mu;
  model.length_sigma = sigma;
  return model;
}

namespace detail {
// Longest-suffix backoff within one source table: use the longest context
// suffix observed at least backoff_threshold times, else fall back to the
// last-strategy conditional.
inline ResponseDistribution backoff_distribution(const TransitionStats& stats,
                                                 std::span<const Strategy> ctx, double lambda,
                                                 std::uint64_t threshold) {
  if (threshold < 1) throw ArgumentError("backoff threshold must be >= 1");
  std::size_t max_len = std::min<std::size_t>(ctx.size(), static_cast<std::size_t>(stats.k));
  for (std::size_t len = max_len; len >= 1; --len) {
    auto suffix = ctx.subspan(ctx.size() - len, len);
    if (stats.context_count(suffix) >= threshold) {
      return p_seq(stats, suffix, lambda);
    }
  }
  return p_last(stats, ctx.back(), lambda);
}
}  // namespace detail

// The response-type distribution a child samples from: per-source backoff
// over the sequence tables, then personal/global blending. A child without
// personal data falls back to the global table alone.
inline ResponseDistribution response_distribution_lookup(const BehaviorModel& model,
                                                         std::span<const Strategy> ctx,
                                                         const std::string& child_id) {
  if (ctx.empty()) throw ArgumentError("context must contain at least one strategy");
  ResponseDistribution global_dist = detail::backoff_distribution(
      model.global, ctx, model.smoothing_lambda, model.backoff_threshold);
  const TransitionStats* personal = model.personal_stats(child_id);
  if (!personal) return global_dist;
  ResponseDistribution personal_dist = detail::backoff_distribution(
      *personal, ctx, model.smoothing_lambda, model.backoff_threshold);
  return blend(personal_dist, global_dist, model.alpha);
}

// Blended interruption probability for one child.
inline double interrupt_probability(const BehaviorModel& model, const std::string& child_id) {
  double global_p = p_interrupt(model.global);
  const TransitionStats* personal = model.personal_stats(child_id);
  if (!personal) return global_p;
  return blend_scalar(p_interrupt(*personal), global_p, model.alpha);
}

struct PhenotypeThresholds {
  double impulsive_interrupt = 0.14;
  double low_relevant = 0.45;
  double assistance_lift = 0.25;
  std::uint64_t min_observations = 10;
};

// Rule cascade over a child's fitted statistics. Returns nullopt when the
// child has too few observed turns to classify.
inline std::optional<Phenotype> classify_profile(const TransitionStats& stats,
                                                 double lambda = 0.5,
                                                 const PhenotypeThresholds& t = {}) {
  if (stats.child_turn_count() < t.min_observations) return std::nullopt;
  if (p_interrupt(stats) > t.impulsive_interrupt) return Phenotype::Impulsive;
  double relevant_instruction =
      p_last(stats, Strategy::Instruction, lambda)[response_index(ResponseType::Relevant)];
  double relevant_half =
      p_last(stats, Strategy::HalfAssistance, lambda)[response_index(ResponseType::Relevant)];
  double relevant_full =
      p_last(stats, Strategy::FullAssistance, lambda)[response_index(ResponseType::Relevant)];
  double best_assisted = std::max(relevant_half, relevant_full);
  if (relevant_instruction < t.low_relevant && best_assisted < t.low_relevant) {
    return Phenotype::Difficult;
  }
  if (best_assisted - relevant_instruction >= t.assistance_lift) {
    return Phenotype::PromptDependent;
  }
  return Phenotype::Compliant;
}

// ---------------------------------------------------------------------------
// Persistence. Counts are stored as integers and real-valued parameters as
// shortest round-trip decimal strings, so save/load is bit-exact.

namespace detail {

inline std::string double_to_string(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double double_from_string(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("malformed decimal string: '" + s + "'");
  }
  return v;
}

inline std::string context_key(std::span<const Strategy> ctx) {
  std::string key;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    if (i > 0) key += '+';
    key += to_label(ctx[i]);
  }
  return key;
}

inline std::vector<Strategy> context_from_key(const std::string& key) {
  std::vector<Strategy> ctx;
  std::size_t start = 0;
  while (start <= key.size()) {
    std::size_t end = key.find('+', start);
    if (end == std::string::npos) end = key.size();
    std::string label = key.substr(start, end - start);
    auto s = parse_strategy_label(label);
    if (!s) throw ParseError("unknown strategy in context key: '" + label + "'");
    ctx.push_back(*s);
    if (end == key.size()) break;
    start = end + 1;
  }
  return ctx;
}

inline nlohmann::ordered_json stats_to_json(const TransitionStats& stats) {
  nlohmann::ordered_json j;
  j["k"] = stats.k;
  nlohmann::ordered_json seq = nlohmann::ordered_json::array();
  for (const auto& [ctx, counts] : stats.seq_counts) {
    seq.push_back({context_key(ctx), counts});
  }
  j["seq"] = std::move(seq);
  nlohmann::ordered_json last;
  for (Strategy s : kSegmentStrategies) {
    last[to_label(s)] = stats.last_counts[strategy_index(s)];
  }
  j["last"] = std::move(last);
  j["interruptions"] = stats.interruptions;
  j["opportunities"] = stats.interrupt_opportunities;
  j["marginal"] = stats.response_marginal;
  return j;
}

inline TransitionStats stats_from_json(const nlohmann::json& j) {
  TransitionStats stats;
  stats.k = j.at("k").get<int>();
  for (const auto& entry : j.at("seq")) {
    std::vector<Strategy> ctx = context_from_key(entry.at(0).get<std::string>());
    ResponseCounts counts = entry.at(1).get<ResponseCounts>();
    stats.seq_counts[std::move(ctx)] = counts;
  }
  for (Strategy s : kSegmentStrategies) {
    stats.last_counts[strategy_index(s)] = j.at("last").at(to_label(s)).get<ResponseCounts>();
  }
  stats.interruptions = j.at("interruptions").get<std::uint64_t>();
  stats.interrupt_opportunities = j.at("opportunities").get<std::uint64_t>();
  stats.response_marginal = j.at("marginal").get<ResponseCounts>();
  return stats;
}

}  // namespace detail

inline std::string save_model(const BehaviorModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "abasim-model/1";
  j["k"] = model.k;
  j["alpha"] = detail::double_to_string(model.alpha);
  j["smoothing_lambda"] = detail::double_to_string(model.smoothing_lambda);
  j["backoff_threshold"] = model.backoff_threshold;
  j["length_mu"] = detail::double_to_string(model.length_mu);
  j["length_sigma"] = detail::double_to_string(model.length_sigma);
  j["global"] = detail::stats_to_json(model.global);
  nlohmann::ordered_json personal;
  for (const auto& [child_id, stats] : model.personal) {
    personal[child_id] = detail::stats_to_json(stats);
  }
  j["personal"] = std::move(personal);
  return j.dump(2);
}

inline BehaviorModel load_model(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("model document is not valid JSON");
  if (j.value("format", "") != "abasim-model/1") {
    throw ParseError("unsupported model format");
  }
  BehaviorModel model;
  model.k = j.at("k").get<int>();
  model.alpha = detail::double_from_string(j.at("alpha").get<std::string>());
  model.smoothing_lambda =
      detail::double_from_string(j.at("smoothing_lambda").get<std::string>());
  model.backoff_threshold = j.at("backoff_threshold").get<std::uint64_t>();
  model.length_mu = detail::double_from_string(j.at("length_mu").get<std::string>());
  model.length_sigma = detail::double_from_string(j.at("length_sigma").get<std::string>());
  model.global = detail::stats_from_json(j.at("global"));
  for (const auto& [child_id, stats_json] : j.at("personal").items()) {
    model.personal[child_id] = detail::stats_from_json(stats_json);
  }
  return model;
}

}  // namespace abasim
