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

// Brute-force reference implementations for metric checks. Everything here
// is deliberately naive and independent of the library's algorithms.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline PRF prf_from(double overlap, double pred_size, double ref_size) {
  PRF out;
  out.precision = pred_size > 0.0 ? overlap / pred_size : 0.0;
  out.recall = ref_size > 0.0 ? overlap / ref_size : 0.0;
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

// Multiset intersection by exhaustive per-value counting.
template <typename T>
PRF multiset_prf(const std::vector<T>& pred, const std::vector<T>& ref) {
  double overlap = 0.0;
  std::map<T, int> seen;
  for (const T& x : pred) {
    int used = seen[x]++;
    int available = 0;
    for (const T& y : ref) {
      if (y == x) ++available;
    }
    if (used < available) overlap += 1.0;
  }
  return prf_from(overlap, static_cast<double>(pred.size()), static_cast<double>(ref.size()));
}

template <typename T>
bool is_subsequence(const std::vector<T>& needle, const std::vector<T>& haystack) {
  std::size_t i = 0;
  for (const T& x : haystack) {
    if (i < needle.size() && needle[i] == x) ++i;
  }
  return i == needle.size();
}

// LCS by exponential enumeration of every subsequence of `pred`; only usable
// for short sequences (tests keep |pred| <= 8).
template <typename T>
std::size_t lcs_length(const std::vector<T>& pred, const std::vector<T>& ref) {
  std::size_t best = 0;
  std::size_t subsets = static_cast<std::size_t>(1) << pred.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<T> candidate;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (mask & (static_cast<std::size_t>(1) << i)) candidate.push_back(pred[i]);
    }
    if (candidate.size() <= best) continue;
    if (is_subsequence(candidate, ref)) best = candidate.size();
  }
  return best;
}

template <typename T>
PRF lcs_prf(const std::vector<T>& pred, const std::vector<T>& ref) {
  return prf_from(static_cast<double>(lcs_length(pred, ref)),
                  static_cast<double>(pred.size()), static_cast<double>(ref.size()));
}

// Direct formula evaluation of KL with additive smoothing, mirroring the
// definition rather than any library code path.
inline double kl(const std::vector<double>& p, const std::vector<double>& q,
                 double epsilon = 1e-9) {
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
    sum += pi * std::log(pi / qi);
  }
  return sum;
}

// Mean of clip(round(exp(mu + sigma z)), lo, hi) for standard normal z, by
// Simpson quadrature on a wide, dense grid.
inline double clipped_lognormal_mean(double mu, double sigma, double lo, double hi) {
  auto value = [&](double z) {
    double raw = std::exp(mu + sigma * z);
    double rounded = std::nearbyint(raw);
    double clipped = std::min(hi, std::max(lo, rounded));
    double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
    return clipped * density;
  };
  const double a = -10.0;
  const double b = 10.0;
  const std::size_t steps = 400000;  // even
  const double h = (b - a) / static_cast<double>(steps);
  double sum = value(a) + value(b);
  for (std::size_t i = 1; i < steps; ++i) {
    double z = a + h * static_cast<double>(i);
    sum += value(z) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

// chi-square upper critical values at significance 0.001
inline double chi_square_critical_999(int df) {
  switch (df) {
    case 1: return 10.828;
    case 2: return 13.816;
    case 3: return 16.266;
    case 4: return 18.467;
    case 5: return 20.515;
    default: return 22.458;  // df 6
  }
}

inline double chi_square_statistic(const std::vector<std::uint64_t>& observed,
                                   const std::vector<double>& expected_probs,
                                   std::uint64_t draws) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double expected = expected_probs[i] * static_cast<double>(draws);
    if (expected <= 0.0) continue;
    double diff = static_cast<double>(observed[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

}  // namespace oracle
