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

// Domain types shared by selection, calibration, surrogate and harness code.

#ifndef PRUNECAL_TYPES_H_
#define PRUNECAL_TYPES_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prunecal {

// Visual tokens of one example: a V x d row-major feature matrix plus one
// non-negative attention score per token. Features are float32 to match the
// on-disk format bit for bit.
struct TokenFeatureSet {
  std::size_t num_tokens = 0;
  std::size_t dim = 0;
  std::vector<float> features;
  std::vector<float> attention;

  std::span<const float> Row(std::size_t token) const {
    return {features.data() + token * dim, dim};
  }

  friend bool operator==(const TokenFeatureSet&,
                         const TokenFeatureSet&) = default;
};

// Throws Error{kDimensionMismatch | kNonFiniteEntry | kNegativeAttention}
// naming the first offending index.
void ValidateFeatureSet(const TokenFeatureSet& fs);

enum class Strategy {
  kCoverageSaliency,
  kSaliencyOnly,
  kRandom,
  kAttentionRank,
};

// Report label: "coverage_saliency", "saliency_only", "random", "fastv_rank".
std::string_view StrategyName(Strategy strategy);
// Accepts the report labels plus "attention_rank" and "scope".
Strategy ParseStrategy(std::string_view name);

struct SelectionConfig {
  Strategy strategy = Strategy::kCoverageSaliency;
  std::size_t budget = 1;
  double alpha = 1.0;
  double gap_power = 1.0;
  std::uint64_t seed = 0;
};

// Checks budget in [1, num_tokens], alpha >= 0, gap_power >= 1.
void ValidateSelectionConfig(const SelectionConfig& config,
                             std::size_t num_tokens);

struct SelectionResult {
  // Kept token indices in selection order.
  std::vector<std::size_t> kept;
  // Winning score at each step (marginal gain, or attention for the
  // ranking strategies).
  std::vector<double> step_scores;
  // C(u, S_final) for every token. Only the coverage strategy fills this.
  std::vector<double> coverage_final;
};

using ProbabilityMap = std::map<std::string, double>;

struct PredictionRecord {
  std::string example_id;
  std::string split;
  ProbabilityMap candidate_probs;
  std::string true_label;
  double confidence = 0.0;
  bool correct = false;
};

// Highest-probability label; ties go to the lexicographically smallest label.
const std::string& ArgmaxLabel(const ProbabilityMap& probs);

// Builds a record from already-normalized probabilities, deriving confidence
// and correctness. Throws kUnknownTrueLabel / kUnnormalizedProbs.
PredictionRecord MakeRecord(std::string example_id, std::string split,
                            ProbabilityMap probs, std::string true_label);

// Recomputes confidence and correct from candidate_probs in place.
void RefreshDerived(PredictionRecord& record);

struct ReliabilityBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  // Absent when count == 0.
  std::optional<double> mean_confidence;
  std::optional<double> empirical_accuracy;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct CalibrationReport {
  std::size_t num_records = 0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
  double ece = 0.0;
  double brier = 0.0;
  double nll = 0.0;
  double aurc = 0.0;
  // Mean confidence minus accuracy, as a fraction.
  double overconfidence = 0.0;
  double t_opt = 1.0;
  std::vector<ReliabilityBin> bins;
  Interval ece_ci;
};

struct SurrogateConfig {
  std::size_t num_tokens = 96;
  std::size_t dim = 16;
  std::size_t num_evidence_clusters = 6;
  std::size_t num_distractor_clusters = 6;
  double cluster_spread = 0.15;
  double evidence_weight = 6.0;
  double overconfidence_gain = 1.5;
  // Multiplier applied to the attention of distractor-cluster tokens.
  double distractor_attention_boost = 1.4;
  std::size_t num_examples = 5000;
  std::uint64_t seed = 0;

  friend bool operator==(const SurrogateConfig&,
                         const SurrogateConfig&) = default;
};

// Throws kInvalidConfig.
void ValidateSurrogateConfig(const SurrogateConfig& cfg);

}  // namespace prunecal

#endif  // PRUNECAL_TYPES_H_
