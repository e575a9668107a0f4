// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Naive reference implementations used only by tests. They are written
// straight from the definitions, favouring obviousness over speed, and share
// no code with the library beyond the data types.

#ifndef PRUNECAL_TESTS_ORACLES_H_
#define PRUNECAL_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "prunecal/selection.h"
#include "prunecal/types.h"

namespace oracle {

using prunecal::PredictionRecord;
using prunecal::SimMatrix;
using prunecal::TokenFeatureSet;

inline double Dot(const TokenFeatureSet& fs, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t k = 0; k < fs.dim; ++k) {
    s += static_cast<double>(fs.features[a * fs.dim + k]) *
         static_cast<double>(fs.features[b * fs.dim + k]);
  }
  return s;
}

inline double Cosine(const TokenFeatureSet& fs, std::size_t a, std::size_t b) {
  const double na = std::sqrt(Dot(fs, a, a));
  const double nb = std::sqrt(Dot(fs, b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return Dot(fs, a, b) / (na * nb);
}

// C(u, S) straight from the definition, with the empty-set value 0 acting as
// a floor.
inline double Coverage(const SimMatrix& sim, std::size_t u,
                       const std::vector<std::size_t>& s) {
  double c = 0.0;
  for (std::size_t x : s) c = std::max(c, sim(u, x));
  return c;
}

inline double Weight(double a, double alpha) {
  if (alpha == 0.0) return 1.0;
  return std::pow(a, alpha);
}

inline double Marginal(const SimMatrix& sim, const std::vector<float>& att,
                       const std::vector<std::size_t>& s, std::size_t v,
                       double alpha, double p) {
  double sum = 0.0;
  for (std::size_t u = 0; u < sim.size(); ++u) {
    const double gap = sim(u, v) - Coverage(sim, u, s);
    if (gap > 0.0) sum += std::pow(gap, p);
  }
  return sum * Weight(att[v], alpha);
}

inline bool Contains(const std::vector<std::size_t>& s, std::size_t v) {
  return std::find(s.begin(), s.end(), v) != s.end();
}

// Index of the best remaining candidate by exhaustive scoring.
inline std::size_t BruteForceArgmax(const SimMatrix& sim,
                                    const std::vector<float>& att,
                                    const std::vector<std::size_t>& s,
                                    double alpha, double p) {
  std::size_t best = sim.size();
  double best_score = 0.0;
  for (std::size_t v = 0; v < sim.size(); ++v) {
    if (Contains(s, v)) continue;
    const double score = Marginal(sim, att, s, v, alpha, p);
    if (best == sim.size() || score > best_score) {
      best = v;
      best_score = score;
    }
  }
  return best;
}

// Plain facility-location greedy. The gain of v is the total improvement of
// per-element coverage, sum_u (max(C_u, sim(u, v)) - C_u), summed element by
// element rather than as a difference of two large totals so that exact
// duplicates tie exactly.
inline std::vector<std::size_t> FacilityLocationGreedy(
    const SimMatrix& sim, const std::vector<float>& att, std::size_t k,
    double alpha) {
  std::vector<std::size_t> s;
  while (s.size() < k) {
    std::size_t best = sim.size();
    double best_gain = 0.0;
    for (std::size_t v = 0; v < sim.size(); ++v) {
      if (Contains(s, v)) continue;
      double improvement = 0.0;
      for (std::size_t u = 0; u < sim.size(); ++u) {
        double covered = 0.0;
        for (std::size_t x : s) covered = std::max(covered, sim(u, x));
        improvement += std::max(covered, sim(u, v)) - covered;
      }
      const double gain = improvement * Weight(att[v], alpha);
      if (best == sim.size() || gain > best_gain) {
        best = v;
        best_gain = gain;
      }
    }
    s.push_back(best);
  }
  return s;
}

// Metric oracles work on (confidence, correct, p_true, probs) views.

inline double Ece(const std::vector<PredictionRecord>& records,
                  std::size_t bins) {
  const double n = static_cast<double>(records.size());
  double ece = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / static_cast<double>(bins);
    const double hi = static_cast<double>(b + 1) / static_cast<double>(bins);
    const bool last = b + 1 == bins;
    double count = 0.0, conf = 0.0, hits = 0.0;
    for (const auto& r : records) {
      const bool in = r.confidence >= lo &&
                      (last ? r.confidence <= 1.0 : r.confidence < hi);
      if (!in) continue;
      count += 1.0;
      conf += r.confidence;
      hits += r.correct ? 1.0 : 0.0;
    }
    if (count == 0.0) continue;
    ece += (count / n) * std::fabs(hits / count - conf / count);
  }
  return ece;
}

inline double Brier(const std::vector<PredictionRecord>& records) {
  double total = 0.0;
  for (const auto& r : records) {
    double s = 0.0;
    for (const auto& [label, p] : r.candidate_probs) {
      const double y = label == r.true_label ? 1.0 : 0.0;
      s += (p - y) * (p - y);
    }
    total += s;
  }
  return total / static_cast<double>(records.size());
}

inline double Nll(const std::vector<PredictionRecord>& records) {
  double total = 0.0;
  for (const auto& r : records) {
    const double p = r.candidate_probs.at(r.true_label);
    total += -std::log(p < 1e-12 ? 1e-12 : p);
  }
  return total / static_cast<double>(records.size());
}

// AURC via explicit ranks: record i sits at position
// #{j : c_j > c_i or (c_j == c_i and j < i)}.
inline double Aurc(const std::vector<PredictionRecord>& records) {
  const std::size_t n = records.size();
  std::vector<int> error_at(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rank = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (records[j].confidence > records[i].confidence ||
          (records[j].confidence == records[i].confidence && j < i)) {
        ++rank;
      }
    }
    error_at[rank] = records[i].correct ? 0 : 1;
  }
  double area = 0.0;
  int errors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    errors += error_at[i];
    area += static_cast<double>(errors) / static_cast<double>(i + 1);
  }
  return area / static_cast<double>(n);
}

// Record whose top probability is exactly `confidence`. Binary for
// confidence >= 1/2; otherwise twenty labels with the remainder spread evenly
// (each below the top). The top label is "a00"; an incorrect record's true
// label is "a01".
inline PredictionRecord RecordWithConfidence(double confidence, bool correct,
                                             std::string id = "r") {
  PredictionRecord r;
  r.example_id = std::move(id);
  r.split = "all";
  const std::size_t labels = confidence >= 0.5 ? 2 : 20;
  const double rest =
      (1.0 - confidence) / static_cast<double>(labels - 1);
  for (std::size_t i = 0; i < labels; ++i) {
    std::string name = "a";
    name += static_cast<char>('0' + i / 10);
    name += static_cast<char>('0' + i % 10);
    r.candidate_probs[name] = i == 0 ? confidence : rest;
  }
  r.true_label = correct ? "a00" : "a01";
  r.confidence = confidence;
  r.correct = correct;
  return r;
}

// Random feature set: Gaussian features, log-normal attention. With
// `with_ties`, some tokens duplicate earlier ones (features and attention)
// and one row may be all zero.
inline TokenFeatureSet RandomFeatureSet(std::mt19937_64& gen, std::size_t v,
                                        std::size_t d, bool with_ties) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  TokenFeatureSet fs;
  fs.num_tokens = v;
  fs.dim = d;
  fs.features.resize(v * d);
  fs.attention.resize(v);
  for (auto& x : fs.features) x = normal(gen);
  for (auto& a : fs.attention) a = std::exp(normal(gen));
  if (with_ties && v >= 3) {
    std::uniform_int_distribution<std::size_t> pick(0, v - 1);
    for (int t = 0; t < 2; ++t) {
      const std::size_t src = pick(gen);
      const std::size_t dst = pick(gen);
      if (src == dst) continue;
      std::copy_n(fs.features.begin() + src * d, d,
                  fs.features.begin() + dst * d);
      fs.attention[dst] = fs.attention[src];
    }
    if (pick(gen) == 0) {
      std::fill_n(fs.features.begin() + pick(gen) * d, d, 0.0f);
    }
  }
  return fs;
}

}  // namespace oracle

#endif  // PRUNECAL_TESTS_ORACLES_H_
