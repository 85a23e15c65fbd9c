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

#include <catch2/catch_amalgamated.hpp>

#include "abasim/metrics.hpp"
#include "abasim/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace abasim;
using Catch::Approx;

namespace {

std::vector<double> random_distribution(Rng& rng, std::size_t size, bool allow_zero) {
  std::vector<double> v(size);
  double total = 0.0;
  for (double& x : v) {
    x = rng.uniform();
    if (allow_zero && rng.bernoulli(0.25)) x = 0.0;
    total += x;
  }
  if (total == 0.0) {
    v[0] = 1.0;
    total = 1.0;
  }
  for (double& x : v) x /= total;
  return v;
}

std::vector<int> random_sequence(Rng& rng, std::size_t max_len, int alphabet) {
  std::vector<int> v(rng.uniform_index(max_len + 1));
  for (int& x : v) x = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(alphabet)));
  return v;
}

}  // namespace

TEST_CASE("multiset PRF on pinned cases") {
  std::vector<int> same = {1, 2, 3, 2};
  PRF identity = multiset_prf(same, same);
  CHECK(identity.precision == 1.0);
  CHECK(identity.recall == 1.0);
  CHECK(identity.f1 == 1.0);

  // two shared Instruction occurrences out of three each
  std::vector<Strategy> pred = {Strategy::Instruction, Strategy::Instruction, Strategy::Other};
  std::vector<Strategy> ref = {Strategy::Instruction, Strategy::Reinforcement,
                               Strategy::Instruction};
  PRF partial = multiset_prf(pred, ref);
  CHECK(partial.precision == Approx(2.0 / 3.0));
  CHECK(partial.recall == Approx(2.0 / 3.0));
  CHECK(partial.f1 == Approx(2.0 / 3.0));

  PRF empty_pred = multiset_prf(std::vector<int>{}, std::vector<int>{1, 2});
  CHECK(empty_pred.precision == 0.0);
  CHECK(empty_pred.recall == 0.0);
  CHECK(empty_pred.f1 == 0.0);
}

TEST_CASE("LCS PRF on pinned cases") {
  std::vector<Strategy> same = {Strategy::Instruction, Strategy::Reinforcement};
  PRF identity = lcs_prf(same, same);
  CHECK(identity.f1 == 1.0);

  // order flip keeps an LCS of 2 of 3
  std::vector<Strategy> pred = {Strategy::Instruction, Strategy::Reinforcement, Strategy::Other};
  std::vector<Strategy> ref = {Strategy::Instruction, Strategy::Other, Strategy::Reinforcement};
  PRF flipped = lcs_prf(pred, ref);
  CHECK(flipped.precision == Approx(2.0 / 3.0));
  CHECK(flipped.recall == Approx(2.0 / 3.0));
  CHECK(flipped.f1 == Approx(2.0 / 3.0));

  std::vector<int> a = {1, 1};
  std::vector<int> b = {2, 2};
  PRF disjoint = lcs_prf(a, b);
  CHECK(disjoint.f1 == 0.0);
}

TEST_CASE("multiset and LCS agree with brute-force oracles") {
  Rng rng(20260811);
  for (int iter = 0; iter < 3000; ++iter) {
    std::vector<int> pred = random_sequence(rng, 8, 6);
    std::vector<int> ref = random_sequence(rng, 8, 6);
    PRF multi = multiset_prf(pred, ref);
    PRF seq = lcs_prf(pred, ref);
    oracle::PRF multi_oracle = oracle::multiset_prf(pred, ref);
    oracle::PRF seq_oracle = oracle::lcs_prf(pred, ref);
    REQUIRE(multi.precision == Approx(multi_oracle.precision).margin(1e-12));
    REQUIRE(multi.recall == Approx(multi_oracle.recall).margin(1e-12));
    REQUIRE(multi.f1 == Approx(multi_oracle.f1).margin(1e-12));
    REQUIRE(seq.precision == Approx(seq_oracle.precision).margin(1e-12));
    REQUIRE(seq.f1 == Approx(seq_oracle.f1).margin(1e-12));
    // order sensitivity can only lose matches
    REQUIRE(seq.f1 <= multi.f1 + 1e-12);
    if (pred.size() <= 1 && ref.size() <= 1) {
      REQUIRE(seq.f1 == Approx(multi.f1).margin(1e-12));
    }
  }
}

TEST_CASE("KL divergence") {
  std::vector<double> p = {0.5, 0.5};
  std::vector<double> q = {0.25, 0.75};
  CHECK(kl_divergence(p, p) == Approx(0.0).margin(1e-12));
  CHECK(kl_divergence(p, q) == Approx(0.1438).margin(1e-4));
  CHECK(kl_divergence(p, q) != Approx(kl_divergence(q, p)).margin(1e-6));
  CHECK(kl_divergence(p, q, 1e-9, 2.0) ==
        Approx(kl_divergence(p, q) / std::log(2.0)).margin(1e-12));

  std::vector<double> wrong_size = {1.0};
  CHECK_THROWS_AS(kl_divergence(p, wrong_size), ArgumentError);
}

TEST_CASE("JS divergence") {
  std::vector<double> p = {0.3, 0.7};
  CHECK(js_divergence(p, p) == Approx(0.0).margin(1e-12));

  std::vector<double> left = {1.0, 0.0};
  std::vector<double> right = {0.0, 1.0};
  CHECK(js_divergence(left, right) == Approx(1.0).margin(1e-12));

  Rng rng(7);
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<double> a = random_distribution(rng, 5, true);
    std::vector<double> b = random_distribution(rng, 5, true);
    double ab = js_divergence(a, b);
    double ba = js_divergence(b, a);
    REQUIRE(ab >= 0.0);
    REQUIRE(ab <= 1.0 + 1e-12);
    REQUIRE(ab == Approx(ba).margin(1e-12));
    REQUIRE(kl_divergence(a, b) >= -1e-12);
  }
}

TEST_CASE("distinct-n") {
  std::vector<std::vector<std::string>> unique_bigrams = {{"a", "b", "c"}, {"d", "e"}};
  CHECK(distinct_n(unique_bigrams, 2) == 1.0);

  std::vector<std::vector<std::string>> repeated = {{"a", "a", "a", "a"}};
  CHECK(distinct_n(repeated, 2) == Approx(1.0 / 3.0));

  CHECK(distinct_n({}, 2) == 0.0);
  CHECK(distinct_n({{"a"}}, 2) == 0.0);  // too short for any bigram
  CHECK_THROWS_AS(distinct_n({}, 0), ArgumentError);
}

namespace {

// Corpus whose pooled strategy counts hit the given per-ten-thousand values.
std::vector<Dialogue> corpus_with_strategy_counts(const std::array<int, 5>& counts) {
  DoctorTurn turn;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    for (int i = 0; i < counts[s]; ++i) {
      turn.segments.push_back({kSegmentStrategies[s], "x"});
    }
  }
  Dialogue d = fixtures::dialogue("d0", {});
  d.turns.emplace_back(std::move(turn));
  d.turns.emplace_back(fixtures::child_turn(ResponseType::Relevant, "ok"));
  return {d};
}

}  // namespace

TEST_CASE("corpus divergence report") {
  std::vector<Dialogue> real = corpus_with_strategy_counts({4229, 3162, 999, 727, 883});
  std::vector<Dialogue> candidate = corpus_with_strategy_counts({3368, 2685, 1954, 380, 1613});

  SECTION("corpus against itself is zero everywhere") {
    DivergenceReport self = corpus_divergence_report(real, real);
    CHECK(self.strategy_kl == Approx(0.0).margin(1e-12));
    CHECK(self.strategy_js == Approx(0.0).margin(1e-12));
    CHECK(self.response_kl == Approx(0.0).margin(1e-12));
  }

  SECTION("strategy KL matches direct formula evaluation") {
    DivergenceReport report = corpus_divergence_report(real, candidate);
    std::vector<double> p(report.real_strategy.begin(), report.real_strategy.end());
    std::vector<double> q(report.candidate_strategy.begin(), report.candidate_strategy.end());
    CHECK(report.strategy_kl == Approx(oracle::kl(p, q)).margin(1e-12));
    CHECK(report.real_strategy[0] == Approx(0.4229).margin(1e-12));
    CHECK(report.candidate_strategy[0] == Approx(0.3368).margin(1e-12));
  }

  SECTION("zero-support candidate stays finite through smoothing") {
    std::vector<Dialogue> collapsed = corpus_with_strategy_counts({10000, 0, 0, 0, 0});
    DivergenceReport report = corpus_divergence_report(real, collapsed);
    CHECK(std::isfinite(report.strategy_kl));
    CHECK(report.strategy_kl > 1.0);
  }
}

TEST_CASE("strategy consistency report micro-averages") {
  using Pair = std::pair<std::vector<Strategy>, std::vector<Strategy>>;

  SECTION("perfect predictions score 1 everywhere") {
    std::vector<Pair> pairs = {
        {{Strategy::Instruction}, {Strategy::Instruction}},
        {{Strategy::Reinforcement, Strategy::Instruction},
         {Strategy::Reinforcement, Strategy::Instruction}},
    };
    ConsistencyReport report = strategy_consistency_report(pairs);
    CHECK(report.multiset.f1 == 1.0);
    CHECK(report.lcs.f1 == 1.0);
    CHECK(report.turn_pairs == 2);
  }

  SECTION("micro average weights turns by length") {
    // one perfect one-step turn, one fully wrong four-step turn:
    // micro P = (1+0)/(1+4) = 0.2 while a macro mean would say 0.5
    std::vector<Pair> pairs = {
        {{Strategy::Instruction}, {Strategy::Instruction}},
        {{Strategy::Reinforcement, Strategy::Other, Strategy::HalfAssistance,
          Strategy::FullAssistance},
         {Strategy::Instruction, Strategy::Instruction, Strategy::Instruction,
          Strategy::Instruction}},
    };
    ConsistencyReport report = strategy_consistency_report(pairs);
    CHECK(report.multiset.precision == Approx(0.2));
    CHECK(report.multiset.recall == Approx(0.2));
    CHECK(report.lcs.precision == Approx(0.2));
  }

  SECTION("empty input is an error") {
    CHECK_THROWS_AS(strategy_consistency_report({}), ArgumentError);
  }
}
