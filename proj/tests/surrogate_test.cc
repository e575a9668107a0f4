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


#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "prunecal/calibration.h"
#include "prunecal/error.h"
#include "prunecal/io.h"
#include "prunecal/surrogate.h"
#include "test_util.h"

using prunecal::ErrorKind;
using prunecal::Strategy;
using prunecal::SurrogateConfig;
using prunecal::SweepCell;
using testutil::ThrownKind;

namespace {

SurrogateConfig SmallConfig() {
  SurrogateConfig cfg;
  cfg.num_tokens = 24;
  cfg.dim = 8;
  cfg.num_evidence_clusters = 3;
  cfg.num_distractor_clusters = 3;
  cfg.num_examples = 60;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("surrogate config validation") {
  CHECK_NOTHROW(prunecal::ValidateSurrogateConfig(SurrogateConfig{}));
  auto bad = [](auto mutate) {
    SurrogateConfig cfg;
    mutate(cfg);
    return ThrownKind([&] { prunecal::ValidateSurrogateConfig(cfg); });
  };
  CHECK(bad([](auto& c) { c.num_tokens = 0; }) == ErrorKind::kInvalidConfig);
  CHECK(bad([](auto& c) { c.dim = 0; }) == ErrorKind::kInvalidConfig);
  CHECK(bad([](auto& c) { c.num_evidence_clusters = 0; }) ==
        ErrorKind::kInvalidConfig);
  CHECK(bad([](auto& c) { c.num_examples = 0; }) == ErrorKind::kInvalidConfig);
  CHECK(bad([](auto& c) { c.num_tokens = 11; }) == ErrorKind::kInvalidConfig);
  CHECK(bad([](auto& c) { c.evidence_weight = 0; }) ==
        ErrorKind::kInvalidConfig);
  CHECK(bad([](auto& c) { c.cluster_spread = -1; }) ==
        ErrorKind::kInvalidConfig);
  CHECK(bad([](auto& c) { c.overconfidence_gain = NAN; }) ==
        ErrorKind::kInvalidConfig);
  CHECK(bad([](auto& c) { c.distractor_attention_boost = 0; }) ==
        ErrorKind::kInvalidConfig);
}

TEST_CASE("generate_example is deterministic and well formed") {
  const SurrogateConfig cfg = SmallConfig();
  const auto a = prunecal::GenerateExample(cfg, 7);
  const auto b = prunecal::GenerateExample(cfg, 7);
  CHECK(prunecal::EncodeFeatureSet(a.features) ==
        prunecal::EncodeFeatureSet(b.features));
  CHECK(a.layer_attention == b.layer_attention);
  CHECK(a.token_cluster == b.token_cluster);
  CHECK(a.true_label == b.true_label);
  CHECK(a.correctness_draw == b.correctness_draw);
  CHECK(a.example_id == "syn-000007");
  CHECK(a.split == "popular");

  const auto other = prunecal::GenerateExample(cfg, 8);
  CHECK(other.features.features != a.features.features);
  CHECK(other.split == "adversarial");
  CHECK(prunecal::GenerateExample(cfg, 9).split == "random");

  // Cluster labels partition the tokens and every cluster is used.
  const std::size_t clusters =
      cfg.num_evidence_clusters + cfg.num_distractor_clusters;
  REQUIRE(a.token_cluster.size() == cfg.num_tokens);
  std::set<std::size_t> used(a.token_cluster.begin(), a.token_cluster.end());
  CHECK(used.size() == clusters);
  CHECK(*used.rbegin() < clusters);

  CHECK_NOTHROW(prunecal::ValidateFeatureSet(a.features));
  for (std::size_t v = 0; v < cfg.num_tokens; ++v) {
    double norm = 0.0;
    for (float x : a.features.Row(v)) norm += double{x} * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-5));
  }
  CHECK((a.true_label == "yes" || a.true_label == "no"));
  CHECK(a.correctness_draw >= 0.0);
  CHECK(a.correctness_draw < 1.0);
  CHECK(a.WithLayerAttention().attention == a.layer_attention);
  CHECK(a.WithLayerAttention().features == a.features.features);
}

TEST_CASE("zero spread gives tokens equal to their centers") {
  SurrogateConfig cfg = SmallConfig();
  cfg.cluster_spread = 0.0;
  const auto ex = prunecal::GenerateExample(cfg, 3);
  for (std::size_t v = 0; v < cfg.num_tokens; ++v) {
    const std::size_t c = ex.token_cluster[v];
    for (std::size_t k = 0; k < cfg.dim; ++k) {
      CHECK(ex.features.features[v * cfg.dim + k] ==
            ex.cluster_centers[c * cfg.dim + k]);
    }
  }
}

TEST_CASE("distractor tokens receive inflated attention on average") {
  const SurrogateConfig cfg;
  double evidence = 0.0, distractor = 0.0;
  std::size_t ne = 0, nd = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto ex = prunecal::GenerateExample(cfg, i);
    for (std::size_t v = 0; v < cfg.num_tokens; ++v) {
      if (ex.IsEvidenceCluster(ex.token_cluster[v], cfg)) {
        evidence += ex.features.attention[v];
        ++ne;
      } else {
        distractor += ex.features.attention[v];
        ++nd;
      }
    }
  }
  CHECK(distractor / nd > 1.2 * (evidence / ne));
}

TEST_CASE("evidence statistics") {
  const SurrogateConfig cfg = SmallConfig();
  const auto ex = prunecal::GenerateExample(cfg, 1);
  std::vector<std::size_t> all(cfg.num_tokens);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto stats = prunecal::ComputeEvidenceStats(all, ex, cfg);
  CHECK(stats.evidence_coverage == 1.0);
  CHECK(stats.distractor_mass == 0.5);

  std::vector<std::size_t> one_each;
  std::set<std::size_t> seen;
  for (std::size_t v = 0; v < cfg.num_tokens; ++v) {
    const std::size_t c = ex.token_cluster[v];
    if (c < 2 && seen.insert(c).second) one_each.push_back(v);
  }
  stats = prunecal::ComputeEvidenceStats(one_each, ex, cfg);
  CHECK(stats.evidence_coverage == doctest::Approx(2.0 / 3.0));
  CHECK(stats.distractor_mass == 0.0);

  const std::vector<std::size_t> none;
  CHECK(ThrownKind([&] { prunecal::ComputeEvidenceStats(none, ex, cfg); }) ==
        ErrorKind::kEmptyKept);
  CHECK(ThrownKind([&] { prunecal::SurrogatePredict(none, ex, cfg); }) ==
        ErrorKind::kEmptyKept);
  const std::vector<std::size_t> out = {cfg.num_tokens};
  CHECK(ThrownKind([&] { prunecal::ComputeEvidenceStats(out, ex, cfg); }) ==
        ErrorKind::kIndexOutOfRange);
}

TEST_CASE("surrogate confidence model") {
  SurrogateConfig cfg;
  cfg.overconfidence_gain = 0.0;
  CHECK(prunecal::SurrogateConfidence(1.0, 0.0, cfg) ==
        prunecal::SurrogateCorrectProbability(1.0, cfg));
  CHECK(prunecal::SurrogateCorrectProbability(0.5, cfg) == 0.5);

  cfg = SurrogateConfig{};
  for (int ei = 3; ei <= 6; ++ei) {
    const double e = ei / 6.0;
    CHECK(prunecal::SurrogateConfidence(e, 1.0, cfg) >
          prunecal::SurrogateConfidence(e, 0.0, cfg));
    double prev = 0.0;
    for (int mi = 0; mi <= 20; ++mi) {
      const double c = prunecal::SurrogateConfidence(e, mi / 20.0, cfg);
      if (mi > 0) CHECK(c > prev);
      prev = c;
    }
  }
  for (double x : {-40.0, -1.0, 0.0, 2.0, 40.0}) {
    CHECK(prunecal::Sigmoid(x) == doctest::Approx(1.0 / (1.0 + std::exp(-x))));
  }
}

TEST_CASE("surrogate_predict") {
  const SurrogateConfig cfg = SmallConfig();
  for (std::size_t i = 0; i < 30; ++i) {
    const auto ex = prunecal::GenerateExample(cfg, i);
    std::vector<std::size_t> kept = {0, 5, 9};
    const auto r = prunecal::SurrogatePredict(kept, ex, cfg);
    const auto stats = prunecal::ComputeEvidenceStats(kept, ex, cfg);
    const double q =
        prunecal::SurrogateCorrectProbability(stats.evidence_coverage, cfg);
    if (r.confidence == 0.5) {
      CHECK(r.correct == (ex.true_label == "no"));
    } else {
      CHECK(r.correct == (ex.correctness_draw < q));
    }
    CHECK(r.confidence ==
          prunecal::SurrogateConfidence(stats.evidence_coverage,
                                        stats.distractor_mass, cfg));
    CHECK(r.candidate_probs.size() == 2);
    CHECK(r.true_label == ex.true_label);
    CHECK(r.example_id == ex.example_id);
  }
}

TEST_CASE("expand_grid") {
  const auto cells = prunecal::ExpandGrid(
      {Strategy::kCoverageSaliency}, {64, 128, 192}, {0, 0.5, 1}, {1}, {0});
  CHECK(cells.size() == 9);
  CHECK(cells[1].budget == 64);
  CHECK(cells[1].alpha == 0.5);
  CHECK_FALSE(cells[0].seed.has_value());

  const auto mixed = prunecal::ExpandGrid(
      {Strategy::kRandom, Strategy::kSaliencyOnly, Strategy::kAttentionRank},
      {8, 16}, {0, 1}, {1, 2}, {0, 1, 2});
  CHECK(mixed.size() == 2 * 3 + 2 + 2);
  CHECK(mixed[0].seed == 0u);
  CHECK_FALSE(mixed[0].alpha.has_value());

  CHECK(ThrownKind([] {
          prunecal::ExpandGrid({}, {8}, {0}, {1}, {0});
        }) == ErrorKind::kInvalidConfig);
  CHECK(ThrownKind([] {
          prunecal::ExpandGrid({Strategy::kCoverageSaliency}, {8}, {}, {1},
                               {0});
        }) == ErrorKind::kInvalidConfig);
  CHECK(ThrownKind([] {
          prunecal::ExpandGrid({Strategy::kCoverageSaliency}, {8}, {0}, {0.5},
                               {0});
        }) == ErrorKind::kInvalidConfig);
  CHECK(ThrownKind([] {
          prunecal::ExpandGrid({Strategy::kRandom}, {8}, {0}, {1}, {});
        }) == ErrorKind::kInvalidConfig);
}

TEST_CASE("full budget gives identical records for every strategy") {
  const SurrogateConfig cfg = SmallConfig();
  const auto examples = prunecal::GenerateExamples(cfg);
  const auto cells = prunecal::ExpandGrid(
      {Strategy::kCoverageSaliency, Strategy::kSaliencyOnly, Strategy::kRandom,
       Strategy::kAttentionRank},
      {cfg.num_tokens}, {0, 1}, {1, 2}, {0, 1});
  const auto base = prunecal::PredictCell(examples, cells[0], cfg);
  for (const SweepCell& cell : cells) {
    const auto records = prunecal::PredictCell(examples, cell, cfg);
    REQUIRE(records.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(records[i].candidate_probs == base[i].candidate_probs);
      CHECK(records[i].correct == base[i].correct);
    }
  }
}

TEST_CASE("sweep is deterministic and independent of worker count") {
  const SurrogateConfig cfg = SmallConfig();
  const auto cells = prunecal::ExpandGrid(
      {Strategy::kCoverageSaliency, Strategy::kRandom}, {4, 12}, {0, 1}, {1},
      {0, 1});
  const prunecal::ReportOptions options{15, 50, 0.95, 3};
  const auto one = prunecal::RunSurrogateSweep(cfg, cells, options, 1);
  const auto three = prunecal::RunSurrogateSweep(cfg, cells, options, 3);
  REQUIRE(one.size() == cells.size());
  REQUIRE(three.size() == cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(one[i].report.ece == three[i].report.ece);
    CHECK(one[i].report.ece_ci.lower == three[i].report.ece_ci.lower);
    CHECK(one[i].report.brier == three[i].report.brier);
    for (std::size_t r = 0; r < one[i].records.size(); ++r) {
      CHECK(prunecal::FormatPredictionLine(one[i].records[r]) ==
            prunecal::FormatPredictionLine(three[i].records[r]));
    }
  }
  // Different random seeds pick different tokens.
  CHECK(prunecal::ExampleSelectionSeed(0, 4) !=
        prunecal::ExampleSelectionSeed(1, 4));
}

TEST_CASE("zero gain is calibrated at full budget") {
  SurrogateConfig cfg;
  cfg.overconfidence_gain = 0.0;
  cfg.num_examples = 3000;
  const auto examples = prunecal::GenerateExamples(cfg);
  SweepCell cell;
  cell.strategy = Strategy::kSaliencyOnly;
  cell.budget = cfg.num_tokens;
  const auto records = prunecal::PredictCell(examples, cell, cfg);
  CHECK(prunecal::Ece(records) < 0.02);
}
