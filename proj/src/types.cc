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

#include "prunecal/types.h"

#include <cmath>
#include <string>

#include "prunecal/error.h"

namespace prunecal {

void ValidateFeatureSet(const TokenFeatureSet& fs) {
  if (fs.num_tokens < 1 || fs.dim < 1) {
    throw Error(ErrorKind::kDimensionMismatch,
                "need num_tokens >= 1 and dim >= 1, got V=" +
                    std::to_string(fs.num_tokens) +
                    " d=" + std::to_string(fs.dim));
  }
  if (fs.features.size() != fs.num_tokens * fs.dim) {
    throw Error(ErrorKind::kDimensionMismatch,
                "features hold " + std::to_string(fs.features.size()) +
                    " entries, expected V*d=" +
                    std::to_string(fs.num_tokens * fs.dim));
  }
  if (fs.attention.size() != fs.num_tokens) {
    throw Error(ErrorKind::kDimensionMismatch,
                "attention holds " + std::to_string(fs.attention.size()) +
                    " entries, expected V=" + std::to_string(fs.num_tokens));
  }
  for (std::size_t i = 0; i < fs.features.size(); ++i) {
    if (!std::isfinite(fs.features[i])) {
      throw Error(ErrorKind::kNonFiniteEntry,
                  "feature entry " + std::to_string(i) + " (token " +
                      std::to_string(i / fs.dim) + ")");
    }
  }
  for (std::size_t i = 0; i < fs.attention.size(); ++i) {
    if (!std::isfinite(fs.attention[i])) {
      throw Error(ErrorKind::kNonFiniteEntry,
                  "attention entry " + std::to_string(i));
    }
    if (fs.attention[i] < 0.0f) {
      throw Error(ErrorKind::kNegativeAttention,
                  "attention entry " + std::to_string(i));
    }
  }
}

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kCoverageSaliency: return "coverage_saliency";
    case Strategy::kSaliencyOnly: return "saliency_only";
    case Strategy::kRandom: return "random";
    case Strategy::kAttentionRank: return "fastv_rank";
  }
  return "unknown";
}

Strategy ParseStrategy(std::string_view name) {
  if (name == "coverage_saliency" || name == "scope") {
    return Strategy::kCoverageSaliency;
  }
  if (name == "saliency_only" || name == "saliency") {
    return Strategy::kSaliencyOnly;
  }
  if (name == "random") return Strategy::kRandom;
  if (name == "fastv_rank" || name == "attention_rank") {
    return Strategy::kAttentionRank;
  }
  throw Error(ErrorKind::kInvalidConfig,
              "unknown strategy '" + std::string(name) + "'");
}

void ValidateSelectionConfig(const SelectionConfig& config,
                             std::size_t num_tokens) {
  if (config.budget < 1) {
    throw Error(ErrorKind::kInvalidConfig, "budget must be >= 1");
  }
  if (config.budget > num_tokens) {
    throw Error(ErrorKind::kBudgetExceedsTokens,
                "budget " + std::to_string(config.budget) + " > " +
                    std::to_string(num_tokens) + " tokens");
  }
  if (!std::isfinite(config.alpha) || config.alpha < 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "alpha must be finite and >= 0");
  }
  if (!std::isfinite(config.gap_power) || config.gap_power < 1.0) {
    throw Error(ErrorKind::kInvalidConfig,
                "gap_power must be finite and >= 1");
  }
}

const std::string& ArgmaxLabel(const ProbabilityMap& probs) {
  if (probs.empty()) {
    throw Error(ErrorKind::kEmptyInput, "no candidate labels");
  }
  // std::map iterates in lexicographic order, so strict '>' keeps the
  // smallest label on ties.
  auto best = probs.begin();
  for (auto it = std::next(probs.begin()); it != probs.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

void RefreshDerived(PredictionRecord& record) {
  const std::string& label = ArgmaxLabel(record.candidate_probs);
  record.confidence = record.candidate_probs.at(label);
  record.correct = (label == record.true_label);
}

PredictionRecord MakeRecord(std::string example_id, std::string split,
                            ProbabilityMap probs, std::string true_label) {
  if (probs.empty()) {
    throw Error(ErrorKind::kUnnormalizedProbs,
                "record '" + example_id + "' has no candidates");
  }
  double sum = 0.0;
  for (const auto& [label, p] : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorKind::kUnnormalizedProbs,
                  "record '" + example_id + "' label '" + label +
                      "' probability out of [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::kUnnormalizedProbs,
                "record '" + example_id + "' probabilities sum to " +
                    std::to_string(sum));
  }
  if (!probs.contains(true_label)) {
    throw Error(ErrorKind::kUnknownTrueLabel,
                "record '" + example_id + "' true label '" + true_label +
                    "' is not a candidate");
  }
  PredictionRecord record{std::move(example_id), std::move(split),
                          std::move(probs), std::move(true_label), 0.0,
                          false};
  RefreshDerived(record);
  return record;
}

void ValidateSurrogateConfig(const SurrogateConfig& cfg) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidConfig, "surrogate: " + what);
  };
  if (cfg.num_tokens < 1 || cfg.dim < 1 || cfg.num_evidence_clusters < 1 ||
      cfg.num_distractor_clusters < 1 || cfg.num_examples < 1) {
    fail("all counts must be >= 1");
  }
  if (cfg.num_tokens <
      cfg.num_evidence_clusters + cfg.num_distractor_clusters) {
    fail("num_tokens must be at least the total cluster count");
  }
  for (double v : {cfg.evidence_weight, cfg.distractor_attention_boost}) {
    if (!std::isfinite(v) || v <= 0.0) {
      fail("evidence_weight and distractor_attention_boost must be > 0");
    }
  }
  // Zero spread gives noise-free tokens; zero gain gives a calibrated model.
  for (double v : {cfg.cluster_spread, cfg.overconfidence_gain}) {
    if (!std::isfinite(v) || v < 0.0) {
      fail("cluster_spread and overconfidence_gain must be finite and >= 0");
    }
  }
}

}  // namespace prunecal
