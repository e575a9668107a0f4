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

#include "prunecal/selection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "prunecal/error.h"
#include "prunecal/random.h"

namespace prunecal {

namespace {

double GapSum(const SimMatrix& sim, std::span<const double> coverage,
              std::size_t candidate, double gap_power) {
  const std::span<const double> column = sim.Row(candidate);
  double sum = 0.0;
  if (gap_power == 1.0) {
    for (std::size_t u = 0; u < column.size(); ++u) {
      const double gap = column[u] - coverage[u];
      if (gap > 0.0) sum += gap;
    }
  } else {
    for (std::size_t u = 0; u < column.size(); ++u) {
      const double gap = column[u] - coverage[u];
      if (gap > 0.0) sum += std::pow(gap, gap_power);
    }
  }
  return sum;
}

void CheckBudget(const TokenFeatureSet& fs, std::size_t budget) {
  if (budget < 1) {
    throw Error(ErrorKind::kInvalidConfig, "budget must be >= 1");
  }
  if (budget > fs.num_tokens) {
    throw Error(ErrorKind::kBudgetExceedsTokens,
                "budget " + std::to_string(budget) + " > " +
                    std::to_string(fs.num_tokens) + " tokens");
  }
}

SelectionResult RankByAttention(const TokenFeatureSet& fs,
                                 std::size_t budget) {
  CheckBudget(fs, budget);
  std::vector<std::size_t> order(fs.num_tokens);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return fs.attention[a] > fs.attention[b];
                   });
  SelectionResult result;
  result.kept.assign(order.begin(), order.begin() + budget);
  for (std::size_t v : result.kept) {
    result.step_scores.push_back(fs.attention[v]);
  }
  return result;
}

}  // namespace

SimMatrix CosineSimMatrix(const TokenFeatureSet& fs) {
  const std::size_t n = fs.num_tokens;
  std::vector<double> norms(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    double sq = 0.0;
    for (float x : fs.Row(u)) sq += static_cast<double>(x) * x;
    norms[u] = std::sqrt(sq);
  }
  SimMatrix sim(n);
  for (std::size_t u = 0; u < n; ++u) {
    if (norms[u] == 0.0) continue;
    sim.at(u, u) = 1.0;
    const auto row_u = fs.Row(u);
    for (std::size_t v = u + 1; v < n; ++v) {
      if (norms[v] == 0.0) continue;
      const auto row_v = fs.Row(v);
      double dot = 0.0;
      for (std::size_t k = 0; k < fs.dim; ++k) {
        dot += static_cast<double>(row_u[k]) * row_v[k];
      }
      const double s = std::clamp(dot / (norms[u] * norms[v]), -1.0, 1.0);
      sim.at(u, v) = s;
      sim.at(v, u) = s;
    }
  }
  return sim;
}

std::vector<double> CoverageVector(const SimMatrix& sim,
                                   std::span<const std::size_t> selected) {
  std::vector<double> coverage(sim.size(), 0.0);
  for (std::size_t s : selected) {
    if (s >= sim.size()) {
      throw Error(ErrorKind::kIndexOutOfRange,
                  "token index " + std::to_string(s) + " >= " +
                      std::to_string(sim.size()));
    }
    const auto row = sim.Row(s);
    for (std::size_t u = 0; u < coverage.size(); ++u) {
      coverage[u] = std::max(coverage[u], row[u]);
    }
  }
  return coverage;
}

double SaliencyWeight(double attention, double alpha) {
  if (alpha == 0.0) return 1.0;
  return std::pow(attention, alpha);
}

double MarginalScore(const SimMatrix& sim, std::span<const double> coverage,
                     std::span<const float> attention, std::size_t candidate,
                     double alpha, double gap_power) {
  return GapSum(sim, coverage, candidate, gap_power) *
         SaliencyWeight(attention[candidate], alpha);
}

double MarginalScoreForSet(const SimMatrix& sim,
                           std::span<const std::size_t> selected,
                           std::span<const float> attention,
                           std::size_t candidate, double alpha,
                           double gap_power) {
  const std::vector<double> coverage = CoverageVector(sim, selected);
  return MarginalScore(sim, coverage, attention, candidate, alpha, gap_power);
}

SelectionResult GreedySelect(const TokenFeatureSet& fs,
                             const SelectionConfig& config) {
  ValidateSelectionConfig(config, fs.num_tokens);
  const std::size_t n = fs.num_tokens;
  const SimMatrix sim = CosineSimMatrix(fs);

  std::vector<double> weight(n);
  for (std::size_t v = 0; v < n; ++v) {
    weight[v] = SaliencyWeight(fs.attention[v], config.alpha);
  }

  std::vector<double> coverage(n, 0.0);
  std::vector<char> taken(n, 0);
  SelectionResult result;
  result.kept.reserve(config.budget);
  result.step_scores.reserve(config.budget);

  for (std::size_t step = 0; step < config.budget; ++step) {
    std::size_t best = n;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < n; ++v) {
      if (taken[v]) continue;
      const double score =
          GapSum(sim, coverage, v, config.gap_power) * weight[v];
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
    taken[best] = 1;
    result.kept.push_back(best);
    result.step_scores.push_back(best_score);
    const auto row = sim.Row(best);
    for (std::size_t u = 0; u < n; ++u) {
      coverage[u] = std::max(coverage[u], row[u]);
    }
  }
  result.coverage_final = std::move(coverage);
  return result;
}

SelectionResult SaliencyTopK(const TokenFeatureSet& fs, std::size_t budget) {
  return RankByAttention(fs, budget);
}

SelectionResult AttentionRankSelect(const TokenFeatureSet& fs,
                                    std::size_t budget) {
  return RankByAttention(fs, budget);
}

SelectionResult RandomSelect(const TokenFeatureSet& fs, std::size_t budget,
                             std::uint64_t seed) {
  CheckBudget(fs, budget);
  std::vector<std::size_t> pool(fs.num_tokens);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < budget; ++i) {
    const std::size_t j = i + rng.Below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  SelectionResult result;
  result.kept.assign(pool.begin(), pool.begin() + budget);
  for (std::size_t v : result.kept) {
    result.step_scores.push_back(fs.attention[v]);
  }
  return result;
}

SelectionResult SelectTokens(const TokenFeatureSet& fs,
                             const SelectionConfig& config) {
  ValidateFeatureSet(fs);
  ValidateSelectionConfig(config, fs.num_tokens);
  switch (config.strategy) {
    case Strategy::kCoverageSaliency:
      return GreedySelect(fs, config);
    case Strategy::kSaliencyOnly:
      return SaliencyTopK(fs, config.budget);
    case Strategy::kRandom:
      return RandomSelect(fs, config.budget, config.seed);
    case Strategy::kAttentionRank:
      return AttentionRankSelect(fs, config.budget);
  }
  throw Error(ErrorKind::kInternal, "unhandled strategy");
}

}  // namespace prunecal
