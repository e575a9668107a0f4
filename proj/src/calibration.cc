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

#include "prunecal/calibration.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prunecal/error.h"
#include "prunecal/random.h"

namespace prunecal {

namespace {

constexpr std::size_t kGridPoints = 200;
constexpr double kGridMin = 0.05;
constexpr double kGridMax = 10.0;

void RequireNonEmpty(std::span<const PredictionRecord> records,
                     const char* metric) {
  if (records.empty()) {
    throw Error(ErrorKind::kEmptyInput,
                std::string(metric) + " needs at least one record");
  }
}

struct BinAccumulator {
  std::size_t count = 0;
  double confidence_sum = 0.0;
  double correct_sum = 0.0;
};

// Shared by Ece, ReliabilityBins and the ECE bootstrap so all three agree to
// the last bit.
template <typename ConfidenceAt, typename CorrectAt>
std::vector<BinAccumulator> Accumulate(std::size_t n, std::size_t num_bins,
                                       ConfidenceAt confidence_at,
                                       CorrectAt correct_at) {
  std::vector<BinAccumulator> bins(num_bins);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = confidence_at(i);
    BinAccumulator& bin = bins[BinIndex(c, num_bins)];
    ++bin.count;
    bin.confidence_sum += c;
    bin.correct_sum += correct_at(i) ? 1.0 : 0.0;
  }
  return bins;
}

double EceFromAccumulators(const std::vector<BinAccumulator>& bins,
                           std::size_t n) {
  double ece = 0.0;
  for (const BinAccumulator& bin : bins) {
    if (bin.count == 0) continue;
    const double count = static_cast<double>(bin.count);
    const double gap =
        std::abs(bin.correct_sum / count - bin.confidence_sum / count);
    ece += (count / static_cast<double>(n)) * gap;
  }
  return ece;
}

void CheckConfidences(std::span<const PredictionRecord> records) {
  for (const auto& r : records) {
    if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
      throw Error(ErrorKind::kUnnormalizedProbs,
                  "record '" + r.example_id + "' confidence out of [0,1]");
    }
  }
}

// p^(1/T) renormalized, computed relative to the largest entry so small T
// cannot underflow the whole vector.
void ScaleDistribution(std::span<const double> probs, double inv_temperature,
                       std::vector<double>& out) {
  out.resize(probs.size());
  const double pmax = *std::max_element(probs.begin(), probs.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = std::pow(probs[i] / pmax, inv_temperature);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
}

double NegLog(double p) { return -std::log(std::max(p, kProbabilityFloor)); }

// Records flattened for repeated temperature evaluation.
struct CompactRecords {
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> true_index;
};

CompactRecords Compact(std::span<const PredictionRecord> records) {
  CompactRecords out;
  out.probs.reserve(records.size());
  out.true_index.reserve(records.size());
  for (const auto& r : records) {
    std::vector<double> p;
    std::size_t truth = 0;
    for (const auto& [label, value] : r.candidate_probs) {
      if (label == r.true_label) truth = p.size();
      p.push_back(value);
    }
    out.probs.push_back(std::move(p));
    out.true_index.push_back(truth);
  }
  return out;
}

// Same arithmetic as Nll(ApplyTemperature(records, t)).
double ScaledNll(const CompactRecords& data, double temperature,
                 std::vector<double>& scratch) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data.probs.size(); ++i) {
    double p_true;
    if (temperature == 1.0) {
      p_true = data.probs[i][data.true_index[i]];
    } else {
      ScaleDistribution(data.probs[i], 1.0 / temperature, scratch);
      p_true = scratch[data.true_index[i]];
    }
    sum += NegLog(p_true);
  }
  return sum / static_cast<double>(data.probs.size());
}

std::vector<std::size_t> ConfidenceOrder(
    std::span<const PredictionRecord> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return records[a].confidence > records[b].confidence;
                   });
  return order;
}

std::vector<std::size_t> ResampleIndices(std::size_t n, std::uint64_t seed,
                                         std::size_t resample) {
  Rng rng(DeriveSeed(seed, resample));
  std::vector<std::size_t> idx(n);
  for (std::size_t& i : idx) i = rng.Below(n);
  return idx;
}

Interval IntervalFromSamples(std::vector<double> samples, double level) {
  std::sort(samples.begin(), samples.end());
  const double tail = (1.0 - level) / 2.0;
  return {Percentile(samples, tail), Percentile(samples, 1.0 - tail)};
}

void CheckBootstrapArgs(std::span<const PredictionRecord> records,
                        std::size_t resamples, double level) {
  RequireNonEmpty(records, "bootstrap");
  if (resamples < 1) {
    throw Error(ErrorKind::kInvalidConfig, "bootstrap needs >= 1 resample");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "bootstrap level must be in (0,1)");
  }
}

}  // namespace

NormalizedProbs NormalizeBinary(double p_yes_raw, double p_no_raw) {
  return NormalizeMulticlass({{"yes", p_yes_raw}, {"no", p_no_raw}});
}

NormalizedProbs NormalizeMulticlass(const ProbabilityMap& raw) {
  double mass = 0.0;
  for (const auto& [label, p] : raw) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorKind::kUnnormalizedProbs,
                  "raw probability for '" + label + "' must be >= 0");
    }
    mass += p;
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorKind::kZeroMass, "candidate probabilities sum to zero");
  }
  NormalizedProbs out;
  for (const auto& [label, p] : raw) out.probs.emplace(label, p / mass);
  out.confidence = out.probs.at(ArgmaxLabel(out.probs));
  return out;
}

std::size_t BinIndex(double confidence, std::size_t num_bins) {
  if (num_bins < 1) {
    throw Error(ErrorKind::kInvalidConfig, "need at least one bin");
  }
  const double b = static_cast<double>(num_bins);
  if (confidence >= 1.0) return num_bins - 1;
  if (confidence <= 0.0) return 0;
  auto index = static_cast<std::size_t>(std::floor(confidence * b));
  index = std::min(index, num_bins - 1);
  // Snap to the edges as computed by i / B so membership is exactly
  // lower <= c < upper.
  if (index > 0 && confidence < static_cast<double>(index) / b) --index;
  if (index + 1 < num_bins && confidence >= static_cast<double>(index + 1) / b) {
    ++index;
  }
  return index;
}

double Accuracy(std::span<const PredictionRecord> records) {
  RequireNonEmpty(records, "accuracy");
  double correct = 0.0;
  for (const auto& r : records) correct += r.correct ? 1.0 : 0.0;
  return correct / static_cast<double>(records.size());
}

double MeanConfidence(std::span<const PredictionRecord> records) {
  RequireNonEmpty(records, "mean confidence");
  double sum = 0.0;
  for (const auto& r : records) sum += r.confidence;
  return sum / static_cast<double>(records.size());
}

double Ece(std::span<const PredictionRecord> records, std::size_t num_bins) {
  RequireNonEmpty(records, "ece");
  CheckConfidences(records);
  const auto bins = Accumulate(
      records.size(), num_bins,
      [&](std::size_t i) { return records[i].confidence; },
      [&](std::size_t i) { return records[i].correct; });
  return EceFromAccumulators(bins, records.size());
}

double Brier(std::span<const PredictionRecord> records) {
  RequireNonEmpty(records, "brier");
  double total = 0.0;
  for (const auto& r : records) {
    double sq = 0.0;
    for (const auto& [label, p] : r.candidate_probs) {
      const double target = (label == r.true_label) ? 1.0 : 0.0;
      sq += (p - target) * (p - target);
    }
    total += sq;
  }
  return total / static_cast<double>(records.size());
}

double Nll(std::span<const PredictionRecord> records) {
  RequireNonEmpty(records, "nll");
  double sum = 0.0;
  for (const auto& r : records) {
    const auto it = r.candidate_probs.find(r.true_label);
    sum += NegLog(it == r.candidate_probs.end() ? 0.0 : it->second);
  }
  return sum / static_cast<double>(records.size());
}

std::vector<RiskCoveragePoint> RiskCoverageCurve(
    std::span<const PredictionRecord> records) {
  RequireNonEmpty(records, "risk-coverage curve");
  const auto order = ConfidenceOrder(records);
  const double n = static_cast<double>(records.size());
  std::vector<RiskCoveragePoint> curve;
  curve.reserve(records.size());
  std::size_t errors = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!records[order[i]].correct) ++errors;
    const double covered = static_cast<double>(i + 1);
    curve.push_back({covered / n, static_cast<double>(errors) / covered});
  }
  return curve;
}

double Aurc(std::span<const PredictionRecord> records) {
  RequireNonEmpty(records, "aurc");
  double sum = 0.0;
  for (const auto& point : RiskCoverageCurve(records)) sum += point.risk;
  return sum / static_cast<double>(records.size());
}

double Overconfidence(std::span<const PredictionRecord> records) {
  RequireNonEmpty(records, "overconfidence");
  return MeanConfidence(records) - Accuracy(records);
}

std::vector<ReliabilityBin> ReliabilityBins(
    std::span<const PredictionRecord> records, std::size_t num_bins) {
  RequireNonEmpty(records, "reliability bins");
  CheckConfidences(records);
  const auto acc = Accumulate(
      records.size(), num_bins,
      [&](std::size_t i) { return records[i].confidence; },
      [&](std::size_t i) { return records[i].correct; });
  std::vector<ReliabilityBin> bins;
  bins.reserve(num_bins);
  const double b = static_cast<double>(num_bins);
  for (std::size_t i = 0; i < num_bins; ++i) {
    ReliabilityBin bin;
    bin.lower = static_cast<double>(i) / b;
    bin.upper = static_cast<double>(i + 1) / b;
    bin.count = acc[i].count;
    if (bin.count > 0) {
      const double count = static_cast<double>(bin.count);
      bin.mean_confidence = acc[i].confidence_sum / count;
      bin.empirical_accuracy = acc[i].correct_sum / count;
    }
    bins.push_back(bin);
  }
  return bins;
}

double EceFromBins(std::span<const ReliabilityBin> bins,
                   std::size_t num_records) {
  if (num_records == 0) {
    throw Error(ErrorKind::kEmptyInput, "ece from bins needs records");
  }
  double ece = 0.0;
  for (const ReliabilityBin& bin : bins) {
    if (bin.count == 0) continue;
    const double count = static_cast<double>(bin.count);
    ece += (count / static_cast<double>(num_records)) *
           std::abs(*bin.empirical_accuracy - *bin.mean_confidence);
  }
  return ece;
}

SelectiveResult SelectiveAccuracy(std::span<const PredictionRecord> records,
                                  double coverage) {
  RequireNonEmpty(records, "selective accuracy");
  if (!(coverage > 0.0 && coverage <= 1.0)) {
    throw Error(ErrorKind::kCoverageOutOfRange,
                "coverage must be in (0, 1], got " + std::to_string(coverage));
  }
  const double n = static_cast<double>(records.size());
  // The epsilon keeps e.g. 0.8 * 5000 from rounding up to 4001.
  auto keep = static_cast<std::size_t>(std::ceil(coverage * n - 1e-9));
  keep = std::clamp<std::size_t>(keep, 1, records.size());
  const auto order = ConfidenceOrder(records);
  double correct = 0.0;
  for (std::size_t i = 0; i < keep; ++i) {
    correct += records[order[i]].correct ? 1.0 : 0.0;
  }
  return {correct / static_cast<double>(keep),
          records[order[keep - 1]].confidence, keep};
}

std::vector<PredictionRecord> ApplyTemperature(
    std::span<const PredictionRecord> records, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::kInvalidConfig, "temperature must be > 0");
  }
  std::vector<PredictionRecord> out(records.begin(), records.end());
  if (temperature == 1.0) return out;
  std::vector<double> probs;
  std::vector<double> scaled;
  for (PredictionRecord& r : out) {
    probs.clear();
    for (const auto& [label, p] : r.candidate_probs) probs.push_back(p);
    ScaleDistribution(probs, 1.0 / temperature, scaled);
    std::size_t i = 0;
    for (auto& [label, p] : r.candidate_probs) p = scaled[i++];
    RefreshDerived(r);
  }
  return out;
}

const std::vector<double>& TemperatureGrid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    g.reserve(kGridPoints + 1);
    const double lo = std::log(kGridMin);
    const double hi = std::log(kGridMax);
    for (std::size_t i = 0; i < kGridPoints; ++i) {
      g.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(kGridPoints - 1)));
    }
    g.front() = kGridMin;
    g.back() = kGridMax;
    g.push_back(1.0);
    std::sort(g.begin(), g.end());
    return g;
  }();
  return grid;
}

TemperatureFit FitTemperature(std::span<const PredictionRecord> records) {
  RequireNonEmpty(records, "fit_temperature");
  const CompactRecords data = Compact(records);
  std::vector<double> scratch;
  TemperatureFit fit;
  fit.grid = "log-spaced 200 points on [0.05, 10] plus T=1";
  fit.nll_before = ScaledNll(data, 1.0, scratch);
  fit.t_opt = 1.0;
  fit.nll_after = fit.nll_before;
  bool first = true;
  for (double t : TemperatureGrid()) {
    const double value = ScaledNll(data, t, scratch);
    if (first || value < fit.nll_after) {
      fit.nll_after = value;
      fit.t_opt = t;
      first = false;
    }
  }
  return fit;
}

CvTemperatureResult CvTemperature(std::span<const PredictionRecord> records,
                                  std::size_t folds, std::uint64_t seed) {
  if (folds < 2) {
    throw Error(ErrorKind::kInvalidConfig, "cross-validation needs >= 2 folds");
  }
  if (records.size() < folds) {
    throw Error(ErrorKind::kTooFewRecords,
                std::to_string(records.size()) + " records for " +
                    std::to_string(folds) + " folds");
  }
  const std::size_t n = records.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.Below(i + 1)]);
  }

  CvTemperatureResult result;
  result.records.assign(records.begin(), records.end());
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * n / folds;
    const std::size_t end = (f + 1) * n / folds;
    std::vector<PredictionRecord> train;
    std::vector<PredictionRecord> held_out;
    train.reserve(n - (end - begin));
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= begin && i < end) {
        held_out.push_back(records[order[i]]);
      } else {
        train.push_back(records[order[i]]);
      }
    }
    const double t = FitTemperature(train).t_opt;
    result.fold_temperatures.push_back(t);
    const auto scaled = ApplyTemperature(held_out, t);
    for (std::size_t i = begin; i < end; ++i) {
      result.records[order[i]] = scaled[i - begin];
    }
  }
  return result;
}

double Percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorKind::kEmptyInput, "percentile of no values");
  }
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval BootstrapCi(const MetricFn& metric,
                     std::span<const PredictionRecord> records,
                     std::size_t resamples, double level, std::uint64_t seed) {
  CheckBootstrapArgs(records, resamples, level);
  std::vector<double> samples;
  samples.reserve(resamples);
  std::vector<PredictionRecord> resample;
  resample.reserve(records.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    resample.clear();
    for (std::size_t i : ResampleIndices(records.size(), seed, r)) {
      resample.push_back(records[i]);
    }
    samples.push_back(metric(resample));
  }
  return IntervalFromSamples(std::move(samples), level);
}

Interval EceBootstrapCi(std::span<const PredictionRecord> records,
                        std::size_t num_bins, std::size_t resamples,
                        double level, std::uint64_t seed) {
  CheckBootstrapArgs(records, resamples, level);
  CheckConfidences(records);
  std::vector<double> samples;
  samples.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    const auto idx = ResampleIndices(records.size(), seed, r);
    const auto bins = Accumulate(
        idx.size(), num_bins,
        [&](std::size_t i) { return records[idx[i]].confidence; },
        [&](std::size_t i) { return records[idx[i]].correct; });
    samples.push_back(EceFromAccumulators(bins, idx.size()));
  }
  return IntervalFromSamples(std::move(samples), level);
}

CalibrationReport BuildReport(std::span<const PredictionRecord> records,
                              const ReportOptions& options) {
  RequireNonEmpty(records, "report");
  CalibrationReport report;
  report.num_records = records.size();
  report.accuracy = Accuracy(records);
  report.mean_confidence = MeanConfidence(records);
  report.ece = Ece(records, options.num_bins);
  report.brier = Brier(records);
  report.nll = Nll(records);
  report.aurc = Aurc(records);
  report.overconfidence = Overconfidence(records);
  report.t_opt = FitTemperature(records).t_opt;
  report.bins = ReliabilityBins(records, options.num_bins);
  report.ece_ci = EceBootstrapCi(records, options.num_bins, options.resamples,
                                 options.level, options.seed);
  return report;
}

}  // namespace prunecal
