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

// Confidence-quality metrics over prediction records.
//
// All metrics are pure functions of an immutable record list and throw
// Error{kEmptyInput} on an empty list.

#ifndef PRUNECAL_CALIBRATION_H_
#define PRUNECAL_CALIBRATION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "prunecal/types.h"

namespace prunecal {

inline constexpr std::size_t kDefaultBins = 15;
inline constexpr std::size_t kDefaultResamples = 1000;
inline constexpr double kDefaultLevel = 0.95;
inline constexpr std::size_t kDefaultFolds = 5;
inline constexpr double kProbabilityFloor = 1e-12;

struct NormalizedProbs {
  ProbabilityMap probs;
  double confidence = 0.0;
};

// Restricts a first-token distribution to {"yes", "no"}. Throws kZeroMass.
NormalizedProbs NormalizeBinary(double p_yes_raw, double p_no_raw);
// Restricts to an arbitrary candidate set. Throws kZeroMass.
NormalizedProbs NormalizeMulticlass(const ProbabilityMap& raw);

// Bin of `confidence` among [i/B, (i+1)/B), the last bin closed at 1.
std::size_t BinIndex(double confidence, std::size_t num_bins);

double Accuracy(std::span<const PredictionRecord> records);
double MeanConfidence(std::span<const PredictionRecord> records);
double Ece(std::span<const PredictionRecord> records,
           std::size_t num_bins = kDefaultBins);
double Brier(std::span<const PredictionRecord> records);
// Mean of -ln p(true_label), p floored at 1e-12.
double Nll(std::span<const PredictionRecord> records);
double Aurc(std::span<const PredictionRecord> records);
// Mean confidence minus accuracy (fraction; positive = overconfident).
double Overconfidence(std::span<const PredictionRecord> records);

std::vector<ReliabilityBin> ReliabilityBins(
    std::span<const PredictionRecord> records,
    std::size_t num_bins = kDefaultBins);
// ECE recomputed from a bin table over `num_records` records.
double EceFromBins(std::span<const ReliabilityBin> bins,
                   std::size_t num_records);

struct RiskCoveragePoint {
  double coverage = 0.0;
  double risk = 0.0;
};

// One point per prefix of the confidence-descending order (stable on ties).
std::vector<RiskCoveragePoint> RiskCoverageCurve(
    std::span<const PredictionRecord> records);

struct SelectiveResult {
  double accuracy = 0.0;
  double threshold_confidence = 0.0;
  std::size_t num_kept = 0;
};

// Keeps the ceil(coverage * N) most confident records. Throws
// kCoverageOutOfRange unless coverage is in (0, 1].
SelectiveResult SelectiveAccuracy(std::span<const PredictionRecord> records,
                                  double coverage);

// p_c^(1/T) renormalized over the candidate set; T = 1 is an exact copy.
std::vector<PredictionRecord> ApplyTemperature(
    std::span<const PredictionRecord> records, double temperature);

// 200 log-spaced points on [0.05, 10] plus T = 1, ascending.
const std::vector<double>& TemperatureGrid();

struct TemperatureFit {
  double t_opt = 1.0;
  double nll_before = 0.0;
  double nll_after = 0.0;
  std::string grid;
};

// Grid argmin of NLL; ties go to the smallest T.
TemperatureFit FitTemperature(std::span<const PredictionRecord> records);

struct CvTemperatureResult {
  // Input order, each record rescaled by the temperature of its fold.
  std::vector<PredictionRecord> records;
  std::vector<double> fold_temperatures;
};

// Shuffles by `seed`, splits into contiguous folds, fits on the other folds
// and rescales the held-out one. Throws kTooFewRecords if N < folds.
CvTemperatureResult CvTemperature(std::span<const PredictionRecord> records,
                                  std::size_t folds, std::uint64_t seed);

using MetricFn = std::function<double(std::span<const PredictionRecord>)>;

// Percentile bootstrap. Resample r draws from Rng(DeriveSeed(seed, r)) and
// percentiles use linear interpolation between order statistics.
Interval BootstrapCi(const MetricFn& metric,
                     std::span<const PredictionRecord> records,
                     std::size_t resamples = kDefaultResamples,
                     double level = kDefaultLevel, std::uint64_t seed = 0);

// Bootstrap CI of Ece; draws the same resamples as BootstrapCi without
// copying records.
Interval EceBootstrapCi(std::span<const PredictionRecord> records,
                        std::size_t num_bins, std::size_t resamples,
                        double level, std::uint64_t seed);

// Linear-interpolation percentile of sorted values, q in [0, 1].
double Percentile(std::span<const double> sorted, double q);

struct ReportOptions {
  std::size_t num_bins = kDefaultBins;
  std::size_t resamples = kDefaultResamples;
  double level = kDefaultLevel;
  std::uint64_t seed = 0;
};

CalibrationReport BuildReport(std::span<const PredictionRecord> records,
                              const ReportOptions& options = {});

}  // namespace prunecal

#endif  // PRUNECAL_CALIBRATION_H_
