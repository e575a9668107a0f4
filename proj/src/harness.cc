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

#include "prunecal/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "prunecal/csv.h"
#include "prunecal/error.h"
#include "prunecal/io.h"
#include "prunecal/parallel.h"
#include "prunecal/selection.h"

namespace prunecal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFeatureExtension = ".pcf";
constexpr const char* kLayerSuffix = ".layer";

[[noreturn]] void ConfigError(const std::string& what) {
  throw Error(ErrorKind::kInvalidConfig, what);
}

void RejectUnknownKeys(const json& doc, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!doc.is_object()) ConfigError(where + " must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) {
      ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void ReadField(const json& doc, const char* key, T& out,
               const std::string& where) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    ConfigError(where + "." + key + ": " + e.what());
  }
}

std::string FormatOptional(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

std::string FormatSeed(const std::optional<std::uint64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::vector<std::string> CellKeyColumns(const SweepCell& cell) {
  return {std::string(StrategyName(cell.strategy)),
          std::to_string(cell.budget), FormatOptional(cell.alpha),
          FormatOptional(cell.gap_power), FormatSeed(cell.seed)};
}

const std::vector<std::string>& MetricColumns() {
  static const std::vector<std::string> columns = {
      "acc", "ece", "ece_lo", "ece_hi", "brier",
      "nll", "aurc", "overconf", "t_opt"};
  return columns;
}

struct FeatureEntry {
  std::string example_id;
  fs::path path;
};

std::vector<FeatureEntry> ListFeatureFiles(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::kIo,
                "feature directory '" + dir.string() + "' does not exist");
  }
  std::vector<FeatureEntry> entries;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() != kFeatureExtension) continue;
    const std::string stem = p.stem().string();
    if (fs::path(stem).extension() == kLayerSuffix) continue;
    entries.push_back({stem, p});
  }
  std::sort(entries.begin(), entries.end(),
            [](const FeatureEntry& a, const FeatureEntry& b) {
              return a.example_id < b.example_id;
            });
  return entries;
}

// Loaded once per run and shared read-only by the cells.
struct FeatureCache {
  std::vector<std::string> ids;
  std::vector<TokenFeatureSet> cls;
  std::vector<std::optional<TokenFeatureSet>> layer;
};

FeatureCache LoadFeatures(const fs::path& dir, bool need_layer) {
  FeatureCache cache;
  for (const FeatureEntry& entry : ListFeatureFiles(dir)) {
    cache.ids.push_back(entry.example_id);
    cache.cls.push_back(ReadFeatureFile(entry.path));
    if (need_layer) {
      const fs::path layer_path =
          dir / (entry.example_id + kLayerSuffix + kFeatureExtension);
      if (!fs::exists(layer_path)) {
        throw Error(ErrorKind::kIo, "missing layer-attention feature file '" +
                                        layer_path.string() + "'");
      }
      cache.layer.push_back(ReadFeatureFile(layer_path));
    } else {
      cache.layer.emplace_back();
    }
  }
  return cache;
}

SelectionMap SelectFromFiles(const FeatureCache& cache, const SweepCell& cell) {
  SelectionMap out;
  for (std::size_t i = 0; i < cache.ids.size(); ++i) {
    SelectionConfig config = cell.ToSelectionConfig();
    const TokenFeatureSet* features = &cache.cls[i];
    if (cell.strategy == Strategy::kAttentionRank) {
      features = &*cache.layer[i];
    } else if (cell.strategy == Strategy::kRandom) {
      config.seed = ExampleSelectionSeed(config.seed, i);
    }
    try {
      out[cache.ids[i]] = SelectTokens(*features, config).kept;
    } catch (const Error& e) {
      throw Error(e.kind(), "example '" + cache.ids[i] + "': " + e.detail());
    }
  }
  return out;
}

double SampleStddev(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<SeedSummary> SummarizeSeeds(const std::vector<CellResult>& cells) {
  std::vector<std::size_t> budgets;
  std::map<std::size_t, std::vector<const CellResult*>> by_budget;
  for (const CellResult& cell : cells) {
    if (cell.cell.strategy != Strategy::kRandom) continue;
    if (!by_budget.contains(cell.cell.budget)) {
      budgets.push_back(cell.cell.budget);
    }
    by_budget[cell.cell.budget].push_back(&cell);
  }
  std::vector<SeedSummary> out;
  for (std::size_t k : budgets) {
    const auto& group = by_budget[k];
    if (group.size() < 2) continue;
    SeedSummary summary;
    summary.budget = k;
    summary.num_seeds = group.size();
    for (const std::string& column : MetricColumns()) {
      std::vector<double> values;
      for (const CellResult* cell : group) {
        values.push_back(ReportMetrics(cell->analysis.report).at(column));
      }
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      summary.mean[column] = mean;
      summary.stddev[column] = SampleStddev(values, mean);
    }
    out.push_back(std::move(summary));
  }
  return out;
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIo,
                "cannot create '" + dir.string() + "': " + ec.message());
  }
}

std::string JoinDoubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    out += FormatDouble(values[i]);
  }
  return out;
}

}  // namespace

void ValidateExperimentConfig(const ExperimentConfig& cfg) {
  if (cfg.strategies.empty()) ConfigError("strategies must be non-empty");
  if (cfg.budgets.empty()) ConfigError("budgets must be non-empty");
  if (cfg.alphas.empty()) ConfigError("alphas must be non-empty");
  if (cfg.gap_powers.empty()) ConfigError("gap_powers must be non-empty");
  if (cfg.seeds.empty()) ConfigError("seeds must be non-empty");
  if (cfg.output_dir.empty()) ConfigError("output_dir must be set");
  if (cfg.bins < 1) ConfigError("bins must be >= 1");
  if (cfg.resamples < 1) ConfigError("resamples must be >= 1");
  if (cfg.folds < 2) ConfigError("folds must be >= 2");
  if (!(cfg.selective_coverage > 0.0 && cfg.selective_coverage <= 1.0)) {
    ConfigError("selective_coverage must be in (0, 1]");
  }
  if (cfg.data.kind == DataSource::Kind::kSurrogate) {
    ValidateSurrogateConfig(cfg.data.surrogate);
  } else if (cfg.data.predictions_dir.empty()) {
    ConfigError("file data source needs predictions_dir");
  }
  // Checks the per-strategy axes (alpha >= 0, p >= 1, ...).
  ExpandGrid(cfg.strategies, cfg.budgets, cfg.alphas, cfg.gap_powers,
             cfg.seeds);
}

json SurrogateConfigToJson(const SurrogateConfig& cfg) {
  return {
      {"num_tokens", cfg.num_tokens},
      {"dim", cfg.dim},
      {"num_evidence_clusters", cfg.num_evidence_clusters},
      {"num_distractor_clusters", cfg.num_distractor_clusters},
      {"cluster_spread", cfg.cluster_spread},
      {"evidence_weight", cfg.evidence_weight},
      {"overconfidence_gain", cfg.overconfidence_gain},
      {"distractor_attention_boost", cfg.distractor_attention_boost},
      {"num_examples", cfg.num_examples},
      {"seed", cfg.seed},
  };
}

SurrogateConfig SurrogateConfigFromJson(const json& doc) {
  const std::string where = "surrogate";
  RejectUnknownKeys(doc,
                    {"num_tokens", "dim", "num_evidence_clusters",
                     "num_distractor_clusters", "cluster_spread",
                     "evidence_weight", "overconfidence_gain",
                     "distractor_attention_boost", "num_examples", "seed"},
                    where);
  SurrogateConfig cfg;
  ReadField(doc, "num_tokens", cfg.num_tokens, where);
  ReadField(doc, "dim", cfg.dim, where);
  ReadField(doc, "num_evidence_clusters", cfg.num_evidence_clusters, where);
  ReadField(doc, "num_distractor_clusters", cfg.num_distractor_clusters,
            where);
  ReadField(doc, "cluster_spread", cfg.cluster_spread, where);
  ReadField(doc, "evidence_weight", cfg.evidence_weight, where);
  ReadField(doc, "overconfidence_gain", cfg.overconfidence_gain, where);
  ReadField(doc, "distractor_attention_boost", cfg.distractor_attention_boost,
            where);
  ReadField(doc, "num_examples", cfg.num_examples, where);
  ReadField(doc, "seed", cfg.seed, where);
  return cfg;
}

json ExperimentConfigToJson(const ExperimentConfig& cfg) {
  json data;
  if (cfg.data.kind == DataSource::Kind::kSurrogate) {
    data["source"] = "surrogate";
    data["surrogate"] = SurrogateConfigToJson(cfg.data.surrogate);
  } else {
    data["source"] = "files";
    data["features_dir"] = cfg.data.features_dir;
    data["predictions_dir"] = cfg.data.predictions_dir;
  }
  std::vector<std::string> strategies;
  for (Strategy s : cfg.strategies) strategies.emplace_back(StrategyName(s));
  // workers is deliberately absent: it never changes the outputs.
  return {
      {"data", data},
      {"strategies", strategies},
      {"budgets", cfg.budgets},
      {"alphas", cfg.alphas},
      {"gap_powers", cfg.gap_powers},
      {"seeds", cfg.seeds},
      {"output_dir", cfg.output_dir},
      {"bins", cfg.bins},
      {"resamples", cfg.resamples},
      {"folds", cfg.folds},
      {"metric_seed", cfg.metric_seed},
      {"selective_coverage", cfg.selective_coverage},
  };
}

ExperimentConfig ExperimentConfigFromJson(const json& input) {
  const json& doc =
      (input.is_object() && input.contains("config")) ? input.at("config")
                                                      : input;
  const std::string where = "config";
  RejectUnknownKeys(doc,
                    {"data", "strategies", "budgets", "alphas", "gap_powers",
                     "seeds", "output_dir", "bins", "resamples", "folds",
                     "metric_seed", "selective_coverage", "workers"},
                    where);
  ExperimentConfig cfg;
  if (doc.contains("data")) {
    const json& data = doc.at("data");
    RejectUnknownKeys(data,
                      {"source", "surrogate", "features_dir",
                       "predictions_dir"},
                      "data");
    std::string source = "surrogate";
    ReadField(data, "source", source, "data");
    if (source == "surrogate") {
      cfg.data.kind = DataSource::Kind::kSurrogate;
      if (data.contains("surrogate")) {
        cfg.data.surrogate = SurrogateConfigFromJson(data.at("surrogate"));
      }
    } else if (source == "files") {
      cfg.data.kind = DataSource::Kind::kFiles;
      ReadField(data, "features_dir", cfg.data.features_dir, "data");
      ReadField(data, "predictions_dir", cfg.data.predictions_dir, "data");
    } else {
      ConfigError("data.source must be 'surrogate' or 'files'");
    }
  }
  if (doc.contains("strategies")) {
    std::vector<std::string> names;
    ReadField(doc, "strategies", names, where);
    cfg.strategies.clear();
    for (const auto& name : names) cfg.strategies.push_back(ParseStrategy(name));
  }
  ReadField(doc, "budgets", cfg.budgets, where);
  ReadField(doc, "alphas", cfg.alphas, where);
  ReadField(doc, "gap_powers", cfg.gap_powers, where);
  ReadField(doc, "seeds", cfg.seeds, where);
  ReadField(doc, "output_dir", cfg.output_dir, where);
  ReadField(doc, "bins", cfg.bins, where);
  ReadField(doc, "resamples", cfg.resamples, where);
  ReadField(doc, "folds", cfg.folds, where);
  ReadField(doc, "metric_seed", cfg.metric_seed, where);
  ReadField(doc, "selective_coverage", cfg.selective_coverage, where);
  ReadField(doc, "workers", cfg.workers, where);
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const fs::path& path) {
  const std::string text = ReadFileBytes(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    ConfigError(path.string() + ": " + e.what());
  }
  return ExperimentConfigFromJson(doc);
}

AnalysisOptions AnalysisOptionsFor(const ExperimentConfig& cfg) {
  AnalysisOptions options;
  options.report.num_bins = cfg.bins;
  options.report.resamples = cfg.resamples;
  options.report.seed = cfg.metric_seed;
  options.folds = cfg.folds;
  options.selective_coverage = cfg.selective_coverage;
  return options;
}

RecordAnalysis AnalyzeRecords(std::span<const PredictionRecord> records,
                              const AnalysisOptions& options) {
  RecordAnalysis analysis;
  analysis.report = BuildReport(records, options.report);
  analysis.ci_level = options.report.level;
  analysis.selective_coverage = options.selective_coverage;
  analysis.risk_coverage = RiskCoverageCurve(records);
  analysis.selective = SelectiveAccuracy(records, options.selective_coverage);
  if (records.size() >= options.folds) {
    analysis.cv = CvTemperature(records, options.folds, options.report.seed);
    analysis.cv_ece = Ece(analysis.cv->records, options.report.num_bins);
  }
  return analysis;
}

std::string CellKey(const SweepCell& cell) {
  std::string key = std::string(StrategyName(cell.strategy)) + "_K" +
                    std::to_string(cell.budget);
  if (cell.alpha) key += "_a" + FormatDouble(*cell.alpha);
  if (cell.gap_power) key += "_p" + FormatDouble(*cell.gap_power);
  if (cell.seed) key += "_s" + std::to_string(*cell.seed);
  return key;
}

ResultTable RunExperiment(const ExperimentConfig& cfg) {
  ValidateExperimentConfig(cfg);
  const std::vector<SweepCell> cells = ExpandGrid(
      cfg.strategies, cfg.budgets, cfg.alphas, cfg.gap_powers, cfg.seeds);
  const AnalysisOptions options = AnalysisOptionsFor(cfg);
  const std::size_t workers = std::max<std::size_t>(cfg.workers, 1);

  ResultTable table;
  table.cells.resize(cells.size());

  if (cfg.data.kind == DataSource::Kind::kSurrogate) {
    const auto examples = GenerateExamples(cfg.data.surrogate, workers);
    ParallelFor(cells.size(), workers, [&](std::size_t i) {
      CellResult& out = table.cells[i];
      out.cell = cells[i];
      out.records = PredictCell(examples, cells[i], cfg.data.surrogate);
      out.analysis = AnalyzeRecords(out.records, options);
    });
  } else {
    const bool need_layer =
        std::find(cfg.strategies.begin(), cfg.strategies.end(),
                  Strategy::kAttentionRank) != cfg.strategies.end();
    std::optional<FeatureCache> features;
    if (!cfg.data.features_dir.empty()) {
      features = LoadFeatures(cfg.data.features_dir, need_layer);
    }
    ParallelFor(cells.size(), workers, [&](std::size_t i) {
      CellResult& out = table.cells[i];
      out.cell = cells[i];
      const fs::path path =
          fs::path(cfg.data.predictions_dir) / (CellKey(cells[i]) + ".jsonl");
      if (!fs::exists(path)) {
        throw Error(ErrorKind::kIo,
                    "missing prediction file '" + path.string() + "'");
      }
      out.records = ReadPredictionFile(path);
      if (out.records.empty()) {
        throw Error(ErrorKind::kEmptyInput,
                    "prediction file '" + path.string() + "' has no records");
      }
      if (features) out.selections = SelectFromFiles(*features, cells[i]);
      out.analysis = AnalyzeRecords(out.records, options);
    });
  }
  table.seed_summaries = SummarizeSeeds(table.cells);
  return table;
}

std::map<std::string, CalibrationReport> PerSplitReport(
    std::span<const PredictionRecord> records, const ReportOptions& options) {
  std::map<std::string, std::vector<PredictionRecord>> groups;
  for (const auto& r : records) groups[r.split].push_back(r);
  std::map<std::string, CalibrationReport> out;
  for (const auto& [split, group] : groups) {
    if (group.empty()) continue;
    out.emplace(split, BuildReport(group, options));
  }
  return out;
}

const std::vector<std::string>& MasterCsvColumns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c = {"strategy", "K", "alpha", "p", "seed"};
    for (const auto& m : MetricColumns()) c.push_back(m);
    return c;
  }();
  return columns;
}

std::map<std::string, double> ReportMetrics(const CalibrationReport& report) {
  return {
      {"acc", report.accuracy},
      {"ece", report.ece},
      {"ece_lo", report.ece_ci.lower},
      {"ece_hi", report.ece_ci.upper},
      {"brier", report.brier},
      {"nll", report.nll},
      {"aurc", report.aurc},
      // Percentage points, mean confidence minus accuracy.
      {"overconf", 100.0 * report.overconfidence},
      {"t_opt", report.t_opt},
  };
}

json ReportToJson(const RecordAnalysis& analysis) {
  const CalibrationReport& r = analysis.report;
  json doc = {
      {"num_records", r.num_records},
      {"accuracy", r.accuracy},
      {"mean_confidence", r.mean_confidence},
      {"ece", r.ece},
      {"ece_lo", r.ece_ci.lower},
      {"ece_hi", r.ece_ci.upper},
      {"ece_ci_level", analysis.ci_level},
      {"brier", r.brier},
      {"nll", r.nll},
      {"aurc", r.aurc},
      {"overconf_pct", 100.0 * r.overconfidence},
      {"overconf_definition", "mean confidence minus accuracy"},
      {"t_opt", r.t_opt},
      {"selective_coverage", analysis.selective_coverage},
      {"selective_accuracy", analysis.selective.accuracy},
      {"selective_threshold", analysis.selective.threshold_confidence},
  };
  if (analysis.cv_ece) {
    doc["cv_ece"] = *analysis.cv_ece;
    doc["cv_fold_temperatures"] = JoinDoubles(analysis.cv->fold_temperatures);
  }
  return doc;
}

std::string BinsCsv(std::span<const ReliabilityBin> bins) {
  CsvWriter csv({"lower", "upper", "count", "mean_confidence",
                 "empirical_accuracy"});
  for (const ReliabilityBin& bin : bins) {
    csv.Row({FormatDouble(bin.lower), FormatDouble(bin.upper),
             std::to_string(bin.count), FormatOptional(bin.mean_confidence),
             FormatOptional(bin.empirical_accuracy)});
  }
  return csv.str();
}

std::string RiskCoverageCsv(std::span<const RiskCoveragePoint> curve) {
  CsvWriter csv({"coverage", "risk"});
  for (const auto& point : curve) {
    csv.Row({FormatDouble(point.coverage), FormatDouble(point.risk)});
  }
  return csv.str();
}

std::string SplitsCsv(const std::map<std::string, CalibrationReport>& splits) {
  std::vector<std::string> header = {"split", "n"};
  for (const auto& m : MetricColumns()) header.push_back(m);
  CsvWriter csv(header);
  for (const auto& [split, report] : splits) {
    std::vector<std::string> row = {split, std::to_string(report.num_records)};
    const auto metrics = ReportMetrics(report);
    for (const auto& m : MetricColumns()) {
      row.push_back(FormatDouble(metrics.at(m)));
    }
    csv.Row(row);
  }
  return csv.str();
}

void EmitOutputs(const ResultTable& table, const ExperimentConfig& cfg,
                 const fs::path& dir) {
  EnsureDirectory(dir);
  EnsureDirectory(dir / "bins");
  EnsureDirectory(dir / "risk_coverage");

  CsvWriter master(MasterCsvColumns());
  for (const CellResult& cell : table.cells) {
    std::vector<std::string> row = CellKeyColumns(cell.cell);
    const auto metrics = ReportMetrics(cell.analysis.report);
    for (const auto& m : MetricColumns()) {
      row.push_back(FormatDouble(metrics.at(m)));
    }
    master.Row(row);
  }
  for (const SeedSummary& summary : table.seed_summaries) {
    for (const auto* stat : {&summary.mean, &summary.stddev}) {
      std::vector<std::string> row = {
          std::string(StrategyName(Strategy::kRandom)),
          std::to_string(summary.budget), "", "",
          stat == &summary.mean ? "mean" : "std"};
      for (const auto& m : MetricColumns()) {
        row.push_back(FormatDouble(stat->at(m)));
      }
      master.Row(row);
    }
  }
  WriteFileBytes(dir / "results.csv", master.str());

  CsvWriter temperature({"strategy", "K", "alpha", "p", "seed", "t_opt",
                         "ece", "ece_cv", "fold_temperatures"});
  CsvWriter selective({"strategy", "K", "alpha", "p", "seed", "coverage",
                       "selective_acc", "threshold_confidence", "num_kept",
                       "aurc"});
  for (const CellResult& cell : table.cells) {
    const std::string key = CellKey(cell.cell);
    const RecordAnalysis& a = cell.analysis;
    WriteFileBytes(dir / "bins" / (key + ".csv"), BinsCsv(a.report.bins));
    WriteFileBytes(dir / "risk_coverage" / (key + ".csv"),
                   RiskCoverageCsv(a.risk_coverage));

    std::vector<std::string> row = CellKeyColumns(cell.cell);
    row.push_back(FormatDouble(a.report.t_opt));
    row.push_back(FormatDouble(a.report.ece));
    row.push_back(a.cv_ece ? FormatDouble(*a.cv_ece) : "");
    row.push_back(a.cv ? JoinDoubles(a.cv->fold_temperatures) : "");
    temperature.Row(row);

    row = CellKeyColumns(cell.cell);
    row.push_back(FormatDouble(a.selective_coverage));
    row.push_back(FormatDouble(a.selective.accuracy));
    row.push_back(FormatDouble(a.selective.threshold_confidence));
    row.push_back(std::to_string(a.selective.num_kept));
    row.push_back(FormatDouble(a.report.aurc));
    selective.Row(row);
  }
  WriteFileBytes(dir / "temperature.csv", temperature.str());
  WriteFileBytes(dir / "selective.csv", selective.str());

  // ECE heatmap over (alpha, K), one row per (p, alpha).
  std::vector<std::size_t> budgets;
  for (std::size_t k : cfg.budgets) {
    if (std::find(budgets.begin(), budgets.end(), k) == budgets.end()) {
      budgets.push_back(k);
    }
  }
  std::vector<std::string> header = {"p", "alpha"};
  for (std::size_t k : budgets) header.push_back("K=" + std::to_string(k));
  CsvWriter heatmap(header);
  for (double p : cfg.gap_powers) {
    for (double alpha : cfg.alphas) {
      std::vector<std::string> row = {FormatDouble(p), FormatDouble(alpha)};
      bool any = false;
      for (std::size_t k : budgets) {
        std::string value;
        for (const CellResult& cell : table.cells) {
          if (cell.cell.strategy == Strategy::kCoverageSaliency &&
              cell.cell.budget == k && cell.cell.alpha == alpha &&
              cell.cell.gap_power == p) {
            value = FormatDouble(cell.analysis.report.ece);
            any = true;
            break;
          }
        }
        row.push_back(value);
      }
      if (any) heatmap.Row(row);
    }
  }
  WriteFileBytes(dir / "ece_heatmap.csv", heatmap.str());

  bool any_selections = false;
  for (const CellResult& cell : table.cells) {
    if (cell.selections.empty()) continue;
    if (!any_selections) {
      EnsureDirectory(dir / "selections");
      any_selections = true;
    }
    std::string lines;
    for (const auto& [id, kept] : cell.selections) {
      lines += json{{"example_id", id}, {"kept", kept}}.dump();
      lines += '\n';
    }
    WriteFileBytes(dir / "selections" / (CellKey(cell.cell) + ".jsonl"),
                   lines);
  }

  const json manifest = {
      {"toolkit", kToolkitName},
      {"version", kToolkitVersion},
      {"config", ExperimentConfigToJson(cfg)},
  };
  WriteFileBytes(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::optional<std::size_t> WorkersFromEnv() {
  const char* value = std::getenv(kWorkersEnvVar);
  if (value == nullptr || *value == '\0') return std::nullopt;
  char* end = nullptr;
  const long long parsed = std::strtoll(value, &end, 10);
  if (*end != '\0' || parsed < 1) {
    throw Error(ErrorKind::kUsage, std::string(kWorkersEnvVar) +
                                       " must be a positive integer");
  }
  return static_cast<std::size_t>(parsed);
}

}  // namespace prunecal
