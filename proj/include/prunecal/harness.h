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

// Experiment runner: expands a strategy x K x alpha x p x seed grid, produces
// prediction records per cell (from the surrogate or from files written by an
// external extractor), evaluates them, and writes plot-ready outputs.
//
// File data source layout:
//   <features_dir>/<example_id>.pcf        features + CLS attention
//   <features_dir>/<example_id>.layer.pcf  features + LLM-layer attention
//                                          (fastv_rank cells only)
//   <predictions_dir>/<cell key>.jsonl     records for that pruning condition
// Cell keys look like "coverage_saliency_K128_a0.5_p1", "random_K64_s2",
// "saliency_only_K64" and "fastv_rank_K64".

#ifndef PRUNECAL_HARNESS_H_
#define PRUNECAL_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "prunecal/calibration.h"
#include "prunecal/surrogate.h"
#include "prunecal/types.h"

namespace prunecal {

inline constexpr const char* kToolkitName = "prunecal";
inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr const char* kWorkersEnvVar = "PRUNECAL_WORKERS";
inline constexpr double kDefaultSelectiveCoverage = 0.8;

struct DataSource {
  enum class Kind { kSurrogate, kFiles };
  Kind kind = Kind::kSurrogate;
  SurrogateConfig surrogate;
  std::string features_dir;  // optional for kFiles
  std::string predictions_dir;
};

struct ExperimentConfig {
  DataSource data;
  std::vector<Strategy> strategies = {Strategy::kCoverageSaliency};
  // Quarter, half and three quarters of the default surrogate's 96 tokens.
  std::vector<std::size_t> budgets = {24, 48, 72};
  std::vector<double> alphas = {0.0, 0.5, 1.0};
  std::vector<double> gap_powers = {1.0};
  // Selection seeds for the random strategy.
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::string output_dir = "prunecal_out";
  std::size_t bins = kDefaultBins;
  std::size_t resamples = kDefaultResamples;
  std::size_t folds = kDefaultFolds;
  // Seed for bootstrap resampling and cross-validation shuffles.
  std::uint64_t metric_seed = 0;
  double selective_coverage = kDefaultSelectiveCoverage;
  std::size_t workers = 1;
};

// Throws kInvalidConfig.
void ValidateExperimentConfig(const ExperimentConfig& cfg);

nlohmann::json SurrogateConfigToJson(const SurrogateConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
SurrogateConfig SurrogateConfigFromJson(const nlohmann::json& doc);

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& cfg);
// Accepts a bare config object or a run manifest ({"config": {...}}).
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& doc);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

// Everything computed from one cell's records.
struct RecordAnalysis {
  CalibrationReport report;
  double ci_level = kDefaultLevel;
  double selective_coverage = kDefaultSelectiveCoverage;
  std::vector<RiskCoveragePoint> risk_coverage;
  SelectiveResult selective;
  // Present when there are at least `folds` records.
  std::optional<CvTemperatureResult> cv;
  std::optional<double> cv_ece;
};

struct AnalysisOptions {
  ReportOptions report;
  std::size_t folds = kDefaultFolds;
  double selective_coverage = kDefaultSelectiveCoverage;
};

RecordAnalysis AnalyzeRecords(std::span<const PredictionRecord> records,
                              const AnalysisOptions& options);

AnalysisOptions AnalysisOptionsFor(const ExperimentConfig& cfg);

// Kept-token lists for one cell, by example id (file data source only).
using SelectionMap = std::map<std::string, std::vector<std::size_t>>;

struct CellResult {
  SweepCell cell;
  std::vector<PredictionRecord> records;
  RecordAnalysis analysis;
  SelectionMap selections;
};

// Mean and sample standard deviation of the random strategy over seeds.
struct SeedSummary {
  std::size_t budget = 0;
  std::size_t num_seeds = 0;
  std::map<std::string, double> mean;
  std::map<std::string, double> stddev;
};

struct ResultTable {
  std::vector<CellResult> cells;
  std::vector<SeedSummary> seed_summaries;
};

std::string CellKey(const SweepCell& cell);

ResultTable RunExperiment(const ExperimentConfig& cfg);

std::map<std::string, CalibrationReport> PerSplitReport(
    std::span<const PredictionRecord> records,
    const ReportOptions& options = {});

// Column set of results.csv, in order.
const std::vector<std::string>& MasterCsvColumns();

// Row values of a report keyed by MasterCsvColumns() metric names.
std::map<std::string, double> ReportMetrics(const CalibrationReport& report);

// Flat key/value report for a single record set.
nlohmann::json ReportToJson(const RecordAnalysis& analysis);
std::string BinsCsv(std::span<const ReliabilityBin> bins);
std::string RiskCoverageCsv(std::span<const RiskCoveragePoint> curve);
std::string SplitsCsv(const std::map<std::string, CalibrationReport>& splits);

// Writes results.csv, bins/, risk_coverage/, ece_heatmap.csv,
// temperature.csv, selective.csv, selections/ (file source with features)
// and manifest.json into `dir`.
void EmitOutputs(const ResultTable& table, const ExperimentConfig& cfg,
                 const std::filesystem::path& dir);

// Worker count from the environment variable, if set and valid.
std::optional<std::size_t> WorkersFromEnv();

}  // namespace prunecal

#endif  // PRUNECAL_HARNESS_H_
