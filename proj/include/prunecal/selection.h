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

// Visual token selection.
//
// The coverage strategy greedily maximizes
//
//   score(v | S) = sum_u max(0, sim(u, v) - C(u, S))^p * a(v)^alpha
//
// where C(u, S) is the best similarity of token u to any selected token,
// floored at 0 (C(u, {}) = 0), sim is cosine similarity and a(v) is the raw
// attention score. alpha = 0 is pure facility-location coverage and p = 1 is
// the usual linear coverage gain. Ties always go to the lowest token index.

#ifndef PRUNECAL_SELECTION_H_
#define PRUNECAL_SELECTION_H_

#include <cstddef>
#include <span>
#include <vector>

#include "prunecal/types.h"

namespace prunecal {

// Dense symmetric V x V cosine similarity matrix.
class SimMatrix {
 public:
  SimMatrix() = default;
  explicit SimMatrix(std::size_t size)
      : size_(size), values_(size * size, 0.0) {}

  std::size_t size() const { return size_; }
  double operator()(std::size_t u, std::size_t v) const {
    return values_[u * size_ + v];
  }
  double& at(std::size_t u, std::size_t v) { return values_[u * size_ + v]; }
  // Row v; equals column v by symmetry.
  std::span<const double> Row(std::size_t v) const {
    return {values_.data() + v * size_, size_};
  }

 private:
  std::size_t size_ = 0;
  std::vector<double> values_;
};

// Cosine similarity in double precision. All-zero rows are similar to
// nothing, including themselves.
SimMatrix CosineSimMatrix(const TokenFeatureSet& fs);

// C(u, S) for every u. Throws kIndexOutOfRange.
std::vector<double> CoverageVector(const SimMatrix& sim,
                                   std::span<const std::size_t> selected);

// a^alpha with 0^0 = 1, so alpha = 0 ignores attention entirely.
double SaliencyWeight(double attention, double alpha);

// Marginal score of `candidate` given the current coverage vector.
double MarginalScore(const SimMatrix& sim, std::span<const double> coverage,
                     std::span<const float> attention, std::size_t candidate,
                     double alpha, double gap_power);

// Same, given the selected set instead of its coverage.
double MarginalScoreForSet(const SimMatrix& sim,
                           std::span<const std::size_t> selected,
                           std::span<const float> attention,
                           std::size_t candidate, double alpha,
                           double gap_power);

// Greedy coverage-saliency selection (config.strategy is ignored).
SelectionResult GreedySelect(const TokenFeatureSet& fs,
                             const SelectionConfig& config);

// Top-K by attention, descending, ties by lowest index.
SelectionResult SaliencyTopK(const TokenFeatureSet& fs, std::size_t budget);

// K distinct indices by a partial Fisher-Yates shuffle on Rng(seed).
SelectionResult RandomSelect(const TokenFeatureSet& fs, std::size_t budget,
                             std::uint64_t seed);

// Ranking by an externally supplied LLM-layer attention vector stored in
// fs.attention (FastV-style drop). Same ordering rule as SaliencyTopK.
SelectionResult AttentionRankSelect(const TokenFeatureSet& fs,
                                    std::size_t budget);

// Dispatches on config.strategy after validating fs and config.
SelectionResult SelectTokens(const TokenFeatureSet& fs,
                             const SelectionConfig& config);

}  // namespace prunecal

#endif  // PRUNECAL_SELECTION_H_
