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

// Deterministic synthetic stand-in for a vision-language model.
//
// Each example has evidence clusters and distractor clusters of unit-norm
// token features. Distractor tokens get inflated attention. A prediction made
// from a kept token set is correct with probability
//
//   q = sigmoid(w * (e - 1/2))
//
// where e is the fraction of evidence clusters hit by the kept set, while the
// reported confidence is sigmoid(w * (e - 1/2) + g * m), m being the fraction
// of kept tokens that are distractors. With g = 0 the model is calibrated;
// g > 0 makes distractor-heavy token sets overconfident.

#ifndef PRUNECAL_SURROGATE_H_
#define PRUNECAL_SURROGATE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prunecal/calibration.h"
#include "prunecal/types.h"

namespace prunecal {

struct SurrogateExample {
  std::size_t index = 0;
  std::string example_id;
  std::string split;
  // Features with CLS-style attention (distractors inflated).
  TokenFeatureSet features;
  // Attention from a language-model layer; uninformative noise here.
  std::vector<float> layer_attention;
  // Cluster of each token; clusters [0, E) are evidence, [E, E+D) distractor.
  std::vector<std::size_t> token_cluster;
  std::vector<float> cluster_centers;  // (E+D) x d, unit norm
  std::string true_label;
  double correctness_draw = 0.0;  // uniform [0, 1)

  bool IsEvidenceCluster(std::size_t cluster, const SurrogateConfig& cfg) const {
    return cluster < cfg.num_evidence_clusters;
  }
  // Copy of `features` whose attention is the layer attention.
  TokenFeatureSet WithLayerAttention() const;
};

// Deterministic in (cfg.seed, index). Throws kInvalidConfig.
SurrogateExample GenerateExample(const SurrogateConfig& cfg,
                                 std::size_t index);

struct EvidenceStats {
  double evidence_coverage = 0.0;  // e
  double distractor_mass = 0.0;    // m
};

// Throws kEmptyKept / kIndexOutOfRange.
EvidenceStats ComputeEvidenceStats(std::span<const std::size_t> kept,
                                   const SurrogateExample& example,
                                   const SurrogateConfig& cfg);

double Sigmoid(double x);
double SurrogateCorrectProbability(double evidence_coverage,
                                   const SurrogateConfig& cfg);
// Confidence of the predicted label, folded into [1/2, 1].
double SurrogateConfidence(double evidence_coverage, double distractor_mass,
                           const SurrogateConfig& cfg);

// Binary "yes"/"no" record for the given kept set.
PredictionRecord SurrogatePredict(std::span<const std::size_t> kept,
                                  const SurrogateExample& example,
                                  const SurrogateConfig& cfg);

// One cell of a selection sweep. alpha / gap_power only apply to the
// coverage strategy and seed only to the random strategy.
struct SweepCell {
  Strategy strategy = Strategy::kCoverageSaliency;
  std::size_t budget = 1;
  std::optional<double> alpha;
  std::optional<double> gap_power;
  std::optional<std::uint64_t> seed;

  SelectionConfig ToSelectionConfig() const;
};

// Expands strategy x K x alpha x p x seed, keeping only the axes each
// strategy uses. Order: strategy, K, alpha, p, seed. Throws kInvalidConfig
// on an empty grid.
std::vector<SweepCell> ExpandGrid(const std::vector<Strategy>& strategies,
                                  const std::vector<std::size_t>& budgets,
                                  const std::vector<double>& alphas,
                                  const std::vector<double>& gap_powers,
                                  const std::vector<std::uint64_t>& seeds);

// Selection seed of a random cell for one example.
std::uint64_t ExampleSelectionSeed(std::uint64_t cell_seed,
                                   std::size_t example_index);

// Runs the cell's selection on every example and predicts from the kept
// set. fastv_rank ranks by the layer attention.
std::vector<PredictionRecord> PredictCell(
    std::span<const SurrogateExample> examples, const SweepCell& cell,
    const SurrogateConfig& cfg);

std::vector<SurrogateExample> GenerateExamples(const SurrogateConfig& cfg,
                                               std::size_t workers = 1);

struct SweepRow {
  SweepCell cell;
  std::vector<PredictionRecord> records;
  CalibrationReport report;
};

std::vector<SweepRow> RunSurrogateSweep(
    const SurrogateConfig& cfg, const std::vector<SweepCell>& cells,
    const ReportOptions& options = {}, std::size_t workers = 1);

}  // namespace prunecal

#endif  // PRUNECAL_SURROGATE_H_
