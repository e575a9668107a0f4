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

#include "prunecal/surrogate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "prunecal/error.h"
#include "prunecal/parallel.h"
#include "prunecal/random.h"
#include "prunecal/selection.h"

namespace prunecal {

namespace {

constexpr const char* kSplits[] = {"random", "popular", "adversarial"};
constexpr double kAttentionLogScale = 0.5;
constexpr double kLayerAttentionLogScale = 1.0;

std::string ExampleId(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "syn-%06zu", index);
  return buf;
}

void Normalize(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  for (double& x : v) x /= norm;
}

}  // namespace

TokenFeatureSet SurrogateExample::WithLayerAttention() const {
  TokenFeatureSet out = features;
  out.attention = layer_attention;
  return out;
}

SurrogateExample GenerateExample(const SurrogateConfig& cfg,
                                 std::size_t index) {
  ValidateSurrogateConfig(cfg);
  Rng rng(DeriveSeed(cfg.seed, index));
  const std::size_t clusters =
      cfg.num_evidence_clusters + cfg.num_distractor_clusters;
  const std::size_t v_count = cfg.num_tokens;
  const std::size_t d = cfg.dim;

  SurrogateExample ex;
  ex.index = index;
  ex.example_id = ExampleId(index);
  ex.split = kSplits[index % 3];

  ex.cluster_centers.resize(clusters * d);
  std::vector<double> direction(d);
  for (std::size_t c = 0; c < clusters; ++c) {
    // A zero draw has probability zero; redraw rather than divide by it.
    double sq;
    do {
      sq = 0.0;
      for (double& x : direction) {
        x = rng.Normal();
        sq += x * x;
      }
    } while (sq == 0.0);
    Normalize(direction);
    for (std::size_t k = 0; k < d; ++k) {
      ex.cluster_centers[c * d + k] = static_cast<float>(direction[k]);
    }
  }

  ex.token_cluster.resize(v_count);
  for (std::size_t i = 0; i < v_count; ++i) ex.token_cluster[i] = i % clusters;
  for (std::size_t i = v_count - 1; i > 0; --i) {
    std::swap(ex.token_cluster[i], ex.token_cluster[rng.Below(i + 1)]);
  }

  ex.features.num_tokens = v_count;
  ex.features.dim = d;
  ex.features.features.resize(v_count * d);
  ex.features.attention.resize(v_count);
  std::vector<double> token(d);
  for (std::size_t i = 0; i < v_count; ++i) {
    const std::size_t c = ex.token_cluster[i];
    const float* center = &ex.cluster_centers[c * d];
    for (std::size_t k = 0; k < d; ++k) {
      token[k] = center[k] + cfg.cluster_spread * rng.Normal();
    }
    if (cfg.cluster_spread > 0.0) {
      Normalize(token);
      for (std::size_t k = 0; k < d; ++k) {
        ex.features.features[i * d + k] = static_cast<float>(token[k]);
      }
    } else {
      std::copy(center, center + d, ex.features.features.begin() + i * d);
    }
    double attention = std::exp(kAttentionLogScale * rng.Normal());
    if (!ex.IsEvidenceCluster(c, cfg)) {
      attention *= cfg.distractor_attention_boost;
    }
    ex.features.attention[i] = static_cast<float>(attention);
  }

  ex.layer_attention.resize(v_count);
  for (float& a : ex.layer_attention) {
    a = static_cast<float>(std::exp(kLayerAttentionLogScale * rng.Normal()));
  }
  ex.true_label = rng.Uniform() < 0.5 ? "yes" : "no";
  ex.correctness_draw = rng.Uniform();
  return ex;
}

EvidenceStats ComputeEvidenceStats(std::span<const std::size_t> kept,
                                   const SurrogateExample& example,
                                   const SurrogateConfig& cfg) {
  if (kept.empty()) {
    throw Error(ErrorKind::kEmptyKept,
                "example '" + example.example_id + "' kept no tokens");
  }
  std::vector<char> hit(cfg.num_evidence_clusters, 0);
  std::size_t distractors = 0;
  for (std::size_t v : kept) {
    if (v >= example.token_cluster.size()) {
      throw Error(ErrorKind::kIndexOutOfRange,
                  "kept token " + std::to_string(v) + " >= " +
                      std::to_string(example.token_cluster.size()));
    }
    const std::size_t c = example.token_cluster[v];
    if (example.IsEvidenceCluster(c, cfg)) {
      hit[c] = 1;
    } else {
      ++distractors;
    }
  }
  EvidenceStats stats;
  stats.evidence_coverage =
      static_cast<double>(std::count(hit.begin(), hit.end(), 1)) /
      static_cast<double>(cfg.num_evidence_clusters);
  stats.distractor_mass =
      static_cast<double>(distractors) / static_cast<double>(kept.size());
  return stats;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double SurrogateCorrectProbability(double evidence_coverage,
                                   const SurrogateConfig& cfg) {
  return Sigmoid(cfg.evidence_weight * (evidence_coverage - 0.5));
}

double SurrogateConfidence(double evidence_coverage, double distractor_mass,
                           const SurrogateConfig& cfg) {
  const double c = Sigmoid(cfg.evidence_weight * (evidence_coverage - 0.5) +
                           cfg.overconfidence_gain * distractor_mass);
  return std::max(c, 1.0 - c);
}

PredictionRecord SurrogatePredict(std::span<const std::size_t> kept,
                                  const SurrogateExample& example,
                                  const SurrogateConfig& cfg) {
  const EvidenceStats stats = ComputeEvidenceStats(kept, example, cfg);
  const double q = SurrogateCorrectProbability(stats.evidence_coverage, cfg);
  const double confidence = SurrogateConfidence(
      stats.evidence_coverage, stats.distractor_mass, cfg);
  const bool correct = example.correctness_draw < q;
  const std::string other = example.true_label == "yes" ? "no" : "yes";
  const std::string& predicted = correct ? example.true_label : other;
  const std::string& rejected = correct ? other : example.true_label;
  ProbabilityMap probs{{predicted, confidence}, {rejected, 1.0 - confidence}};
  // At confidence exactly 1/2 the label tie-break decides correctness, not
  // the draw.
  return MakeRecord(example.example_id, example.split, std::move(probs),
                    example.true_label);
}

SelectionConfig SweepCell::ToSelectionConfig() const {
  SelectionConfig config;
  config.strategy = strategy;
  config.budget = budget;
  config.alpha = alpha.value_or(1.0);
  config.gap_power = gap_power.value_or(1.0);
  config.seed = seed.value_or(0);
  return config;
}

std::vector<SweepCell> ExpandGrid(const std::vector<Strategy>& strategies,
                                  const std::vector<std::size_t>& budgets,
                                  const std::vector<double>& alphas,
                                  const std::vector<double>& gap_powers,
                                  const std::vector<std::uint64_t>& seeds) {
  if (strategies.empty() || budgets.empty()) {
    throw Error(ErrorKind::kInvalidConfig,
                "strategy and budget grids must be non-empty");
  }
  std::vector<SweepCell> cells;
  for (Strategy strategy : strategies) {
    for (std::size_t k : budgets) {
      if (k < 1) throw Error(ErrorKind::kInvalidConfig, "budget must be >= 1");
      switch (strategy) {
        case Strategy::kCoverageSaliency:
          if (alphas.empty() || gap_powers.empty()) {
            throw Error(ErrorKind::kInvalidConfig,
                        "alpha and gap-power grids must be non-empty");
          }
          for (double alpha : alphas) {
            for (double p : gap_powers) {
              SelectionConfig probe{strategy, k, alpha, p, 0};
              ValidateSelectionConfig(probe, k);
              cells.push_back({strategy, k, alpha, p, std::nullopt});
            }
          }
          break;
        case Strategy::kRandom:
          if (seeds.empty()) {
            throw Error(ErrorKind::kInvalidConfig,
                        "seed grid must be non-empty for random");
          }
          for (std::uint64_t seed : seeds) {
            cells.push_back({strategy, k, std::nullopt, std::nullopt, seed});
          }
          break;
        case Strategy::kSaliencyOnly:
        case Strategy::kAttentionRank:
          cells.push_back(
              {strategy, k, std::nullopt, std::nullopt, std::nullopt});
          break;
      }
    }
  }
  return cells;
}

std::uint64_t ExampleSelectionSeed(std::uint64_t cell_seed,
                                   std::size_t example_index) {
  return DeriveSeed(cell_seed, example_index);
}

std::vector<PredictionRecord> PredictCell(
    std::span<const SurrogateExample> examples, const SweepCell& cell,
    const SurrogateConfig& cfg) {
  std::vector<PredictionRecord> records;
  records.reserve(examples.size());
  for (const SurrogateExample& ex : examples) {
    SelectionConfig config = cell.ToSelectionConfig();
    SelectionResult selection;
    if (cell.strategy == Strategy::kAttentionRank) {
      selection = SelectTokens(ex.WithLayerAttention(), config);
    } else {
      if (cell.strategy == Strategy::kRandom) {
        config.seed = ExampleSelectionSeed(config.seed, ex.index);
      }
      selection = SelectTokens(ex.features, config);
    }
    records.push_back(SurrogatePredict(selection.kept, ex, cfg));
  }
  return records;
}

std::vector<SurrogateExample> GenerateExamples(const SurrogateConfig& cfg,
                                               std::size_t workers) {
  ValidateSurrogateConfig(cfg);
  std::vector<SurrogateExample> examples(cfg.num_examples);
  ParallelFor(cfg.num_examples, workers,
              [&](std::size_t i) { examples[i] = GenerateExample(cfg, i); });
  return examples;
}

std::vector<SweepRow> RunSurrogateSweep(const SurrogateConfig& cfg,
                                        const std::vector<SweepCell>& cells,
                                        const ReportOptions& options,
                                        std::size_t workers) {
  const auto examples = GenerateExamples(cfg, workers);
  std::vector<SweepRow> rows(cells.size());
  ParallelFor(cells.size(), workers, [&](std::size_t i) {
    rows[i].cell = cells[i];
    rows[i].records = PredictCell(examples, cells[i], cfg);
    rows[i].report = BuildReport(rows[i].records, options);
  });
  return rows;
}

}  // namespace prunecal
