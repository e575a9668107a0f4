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

// prunecal: token selection, calibration metrics and sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "prunecal/calibration.h"
#include "prunecal/csv.h"
#include "prunecal/error.h"
#include "prunecal/harness.h"
#include "prunecal/io.h"
#include "prunecal/selection.h"
#include "prunecal/surrogate.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SelectArgs {
  std::string features;
  std::string strategy = "coverage_saliency";
  std::size_t budget = 0;
  double alpha = 1.0;
  double gap_power = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct MetricArgs {
  std::string predictions;
  std::string out;
  std::size_t bins = prunecal::kDefaultBins;
  std::size_t resamples = prunecal::kDefaultResamples;
  std::size_t folds = prunecal::kDefaultFolds;
  std::uint64_t seed = 0;
  double coverage = prunecal::kDefaultSelectiveCoverage;
};

struct SynthArgs {
  std::string out;
  std::string config;
  prunecal::SurrogateConfig cfg;
};

struct SweepArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::vector<std::string>> strategies;
  std::optional<std::vector<std::size_t>> budgets;
  std::optional<std::vector<double>> alphas;
  std::optional<std::vector<double>> gap_powers;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::uint64_t> metric_seed;
  std::optional<std::size_t> bins;
  std::optional<std::size_t> resamples;
  std::optional<std::size_t> folds;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> examples;
};

void WriteOrPrint(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    prunecal::WriteFileBytes(path, text);
  }
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw prunecal::Error(prunecal::ErrorKind::kIo,
                          "cannot create '" + dir.string() + "'");
  }
}

int RunSelect(const SelectArgs& args) {
  const auto features = prunecal::ReadFeatureFile(args.features);
  prunecal::SelectionConfig config;
  config.strategy = prunecal::ParseStrategy(args.strategy);
  config.budget = args.budget;
  config.alpha = args.alpha;
  config.gap_power = args.gap_power;
  config.seed = args.seed;
  const auto result = prunecal::SelectTokens(features, config);
  std::string text;
  for (std::size_t v : result.kept) text += std::to_string(v) + "\n";
  WriteOrPrint(args.out, text);
  return 0;
}

prunecal::AnalysisOptions OptionsFrom(const MetricArgs& args) {
  prunecal::AnalysisOptions options;
  options.report.num_bins = args.bins;
  options.report.resamples = args.resamples;
  options.report.seed = args.seed;
  options.folds = args.folds;
  options.selective_coverage = args.coverage;
  return options;
}

int RunMetrics(const MetricArgs& args) {
  const auto records = prunecal::ReadPredictionFile(args.predictions);
  const auto analysis = prunecal::AnalyzeRecords(records, OptionsFrom(args));
  const std::string report = prunecal::ReportToJson(analysis).dump(2) + "\n";
  std::cout << report;
  if (!args.out.empty()) {
    const fs::path dir(args.out);
    EnsureDir(dir);
    prunecal::WriteFileBytes(dir / "report.json", report);
    prunecal::WriteFileBytes(dir / "bins.csv",
                             prunecal::BinsCsv(analysis.report.bins));
    prunecal::WriteFileBytes(
        dir / "risk_coverage.csv",
        prunecal::RiskCoverageCsv(analysis.risk_coverage));
  }
  return 0;
}

int RunSplits(const MetricArgs& args) {
  const auto records = prunecal::ReadPredictionFile(args.predictions);
  const auto options = OptionsFrom(args);
  const auto splits = prunecal::PerSplitReport(records, options.report);
  const std::string csv = prunecal::SplitsCsv(splits);
  std::cout << csv;
  if (!args.out.empty()) {
    EnsureDir(args.out);
    prunecal::WriteFileBytes(fs::path(args.out) / "splits.csv", csv);
  }
  return 0;
}

int RunSynth(SynthArgs args, const CLI::App& cmd) {
  prunecal::SurrogateConfig cfg;
  if (!args.config.empty()) {
    cfg = prunecal::SurrogateConfigFromJson(
        json::parse(prunecal::ReadFileBytes(args.config)));
  }
  // Explicit flags override the config file.
  auto take = [&](const char* flag, auto& dst, const auto& src) {
    if (cmd.count(flag) > 0) dst = src;
  };
  take("--tokens", cfg.num_tokens, args.cfg.num_tokens);
  take("--dim", cfg.dim, args.cfg.dim);
  take("--evidence-clusters", cfg.num_evidence_clusters,
       args.cfg.num_evidence_clusters);
  take("--distractor-clusters", cfg.num_distractor_clusters,
       args.cfg.num_distractor_clusters);
  take("--spread", cfg.cluster_spread, args.cfg.cluster_spread);
  take("--evidence-weight", cfg.evidence_weight, args.cfg.evidence_weight);
  take("--overconfidence-gain", cfg.overconfidence_gain,
       args.cfg.overconfidence_gain);
  take("--attention-boost", cfg.distractor_attention_boost,
       args.cfg.distractor_attention_boost);
  take("--examples", cfg.num_examples, args.cfg.num_examples);
  take("--seed", cfg.seed, args.cfg.seed);
  prunecal::ValidateSurrogateConfig(cfg);

  const fs::path dir(args.out);
  EnsureDir(dir / "features");
  std::string metadata;
  for (std::size_t i = 0; i < cfg.num_examples; ++i) {
    const auto ex = prunecal::GenerateExample(cfg, i);
    prunecal::WriteFeatureFile(dir / "features" / (ex.example_id + ".pcf"),
                               ex.features);
    prunecal::WriteFeatureFile(
        dir / "features" / (ex.example_id + ".layer.pcf"),
        ex.WithLayerAttention());
    std::vector<bool> evidence;
    for (std::size_t c : ex.token_cluster) {
      evidence.push_back(ex.IsEvidenceCluster(c, cfg));
    }
    metadata += json{{"example_id", ex.example_id},
                     {"split", ex.split},
                     {"true_label", ex.true_label},
                     {"correctness_draw", ex.correctness_draw},
                     {"token_cluster", ex.token_cluster},
                     {"token_is_evidence", evidence}}
                    .dump();
    metadata += '\n';
  }
  prunecal::WriteFileBytes(dir / "metadata.jsonl", metadata);
  prunecal::WriteFileBytes(
      dir / "surrogate.json",
      prunecal::SurrogateConfigToJson(cfg).dump(2) + "\n");
  std::cout << "wrote " << cfg.num_examples << " examples to " << dir.string()
            << "\n";
  return 0;
}

int RunSweep(const SweepArgs& args) {
  prunecal::ExperimentConfig cfg;
  if (!args.config.empty()) cfg = prunecal::LoadExperimentConfig(args.config);
  if (auto env = prunecal::WorkersFromEnv()) cfg.workers = *env;
  if (args.out) cfg.output_dir = *args.out;
  if (args.strategies) {
    cfg.strategies.clear();
    for (const auto& s : *args.strategies) {
      cfg.strategies.push_back(prunecal::ParseStrategy(s));
    }
  }
  if (args.budgets) cfg.budgets = *args.budgets;
  if (args.alphas) cfg.alphas = *args.alphas;
  if (args.gap_powers) cfg.gap_powers = *args.gap_powers;
  if (args.seeds) cfg.seeds = *args.seeds;
  if (args.metric_seed) cfg.metric_seed = *args.metric_seed;
  if (args.bins) cfg.bins = *args.bins;
  if (args.resamples) cfg.resamples = *args.resamples;
  if (args.folds) cfg.folds = *args.folds;
  if (args.workers) cfg.workers = *args.workers;
  if (args.examples) cfg.data.surrogate.num_examples = *args.examples;

  const auto table = prunecal::RunExperiment(cfg);
  prunecal::EmitOutputs(table, cfg, cfg.output_dir);

  for (const auto& cell : table.cells) {
    const auto& r = cell.analysis.report;
    std::cout << prunecal::CellKey(cell.cell)
              << " acc=" << prunecal::FormatDouble(r.accuracy)
              << " ece=" << prunecal::FormatDouble(r.ece)
              << " overconf_pct=" << prunecal::FormatDouble(100 * r.overconfidence)
              << "\n";
  }
  std::cout << "wrote " << table.cells.size() << " cells to "
            << cfg.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual token selection and calibration evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", prunecal::kToolkitVersion);

  SelectArgs select;
  auto* select_cmd = app.add_subcommand(
      "select", "Select tokens from one feature file into an index list");
  select_cmd->add_option("--features", select.features, "Feature file (.pcf)")
      ->required();
  select_cmd->add_option("--strategy", select.strategy,
                         "coverage_saliency | saliency_only | random | "
                         "fastv_rank")
      ->capture_default_str();
  select_cmd->add_option("-K,--budget", select.budget, "Tokens to keep")
      ->required();
  select_cmd->add_option("--alpha", select.alpha, "Saliency exponent")
      ->capture_default_str();
  select_cmd->add_option("--p,--gap-power", select.gap_power, "Gap power")
      ->capture_default_str();
  select_cmd->add_option("--seed", select.seed, "Seed for random selection")
      ->capture_default_str();
  select_cmd->add_option("--out", select.out, "Output file (default stdout)");

  MetricArgs metrics;
  auto add_metric_options = [](CLI::App* cmd, MetricArgs& m) {
    cmd->add_option("--predictions", m.predictions, "Prediction file (JSONL)")
        ->required();
    cmd->add_option("--out", m.out, "Output directory");
    cmd->add_option("--bins", m.bins, "ECE bins")->capture_default_str();
    cmd->add_option("--resamples", m.resamples, "Bootstrap resamples")
        ->capture_default_str();
    cmd->add_option("--folds", m.folds, "Temperature CV folds")
        ->capture_default_str();
    cmd->add_option("--seed", m.seed, "Bootstrap / CV seed")
        ->capture_default_str();
    cmd->add_option("--coverage", m.coverage, "Selective prediction coverage")
        ->capture_default_str();
  };
  auto* metrics_cmd = app.add_subcommand(
      "metrics", "Calibration report for one prediction file");
  add_metric_options(metrics_cmd, metrics);

  MetricArgs splits;
  auto* splits_cmd =
      app.add_subcommand("splits", "Per-split calibration breakdown");
  add_metric_options(splits_cmd, splits);

  SynthArgs synth;
  auto* synth_cmd =
      app.add_subcommand("synth", "Write surrogate feature files and metadata");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--config", synth.config, "Surrogate config (JSON)");
  synth_cmd->add_option("--tokens", synth.cfg.num_tokens);
  synth_cmd->add_option("--dim", synth.cfg.dim);
  synth_cmd->add_option("--evidence-clusters", synth.cfg.num_evidence_clusters);
  synth_cmd->add_option("--distractor-clusters",
                        synth.cfg.num_distractor_clusters);
  synth_cmd->add_option("--spread", synth.cfg.cluster_spread);
  synth_cmd->add_option("--evidence-weight", synth.cfg.evidence_weight);
  synth_cmd->add_option("--overconfidence-gain", synth.cfg.overconfidence_gain);
  synth_cmd->add_option("--attention-boost",
                        synth.cfg.distractor_attention_boost);
  synth_cmd->add_option("--examples", synth.cfg.num_examples);
  synth_cmd->add_option("--seed", synth.cfg.seed);

  SweepArgs sweep;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Run a strategy x K x alpha x p grid");
  sweep_cmd->add_option("--config", sweep.config,
                        "Experiment config or manifest (JSON)");
  sweep_cmd->add_option("--out", sweep.out, "Output directory");
  sweep_cmd->add_option("--strategies", sweep.strategies)->delimiter(',');
  sweep_cmd->add_option("--budgets", sweep.budgets)->delimiter(',');
  sweep_cmd->add_option("--alphas", sweep.alphas)->delimiter(',');
  sweep_cmd->add_option("--gap-powers", sweep.gap_powers)->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "Random-strategy seeds")
      ->delimiter(',');
  sweep_cmd->add_option("--seed", sweep.metric_seed, "Bootstrap / CV seed");
  sweep_cmd->add_option("--bins", sweep.bins);
  sweep_cmd->add_option("--resamples", sweep.resamples);
  sweep_cmd->add_option("--folds", sweep.folds);
  sweep_cmd->add_option("--workers", sweep.workers,
                        "Worker threads (overrides PRUNECAL_WORKERS)");
  sweep_cmd->add_option("--examples", sweep.examples,
                        "Surrogate example count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*select_cmd) return RunSelect(select);
    if (*metrics_cmd) return RunMetrics(metrics);
    if (*splits_cmd) return RunSplits(splits);
    if (*synth_cmd) return RunSynth(synth, *synth_cmd);
    if (*sweep_cmd) return RunSweep(sweep);
  } catch (const prunecal::Error& e) {
    std::cerr << "prunecal: " << e.what() << "\n";
    return prunecal::ExitCodeFor(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "prunecal: invalid JSON: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "prunecal: internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
