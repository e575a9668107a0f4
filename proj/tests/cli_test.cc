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


#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "prunecal/io.h"
#include "test_util.h"

namespace fs = std::filesystem;

namespace {

// Runs the CLI with stdout/stderr redirected into `log`; returns the exit
// status.
int Run(const std::string& args, const fs::path& log,
        const std::string& env = "") {
  const std::string cmd = env + " " + PRUNECAL_CLI + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cli usage errors exit 1") {
  const auto dir = testutil::ScratchDir("cli_usage");
  const auto log = dir / "log.txt";
  CHECK(Run("", log) == 1);
  CHECK(Run("frobnicate", log) == 1);
  CHECK(Run("select --features x.pcf --budget nope", log) == 1);
  CHECK(Run("--version", log) == 0);
  CHECK(Run("sweep --help", log) == 0);
  fs::remove_all(dir);
}

TEST_CASE("cli synth, select and metrics") {
  const auto dir = testutil::ScratchDir("cli_flow");
  const auto log = dir / "log.txt";
  REQUIRE(Run("synth --out " + (dir / "syn").string() +
                  " --tokens 24 --dim 8 --evidence-clusters 3"
                  " --distractor-clusters 3 --examples 5 --seed 3",
              log) == 0);
  const auto features = dir / "syn" / "features" / "syn-000002.pcf";
  REQUIRE(fs::exists(features));
  CHECK(fs::exists(dir / "syn" / "features" / "syn-000002.layer.pcf"));
  CHECK(fs::exists(dir / "syn" / "metadata.jsonl"));
  const auto surrogate = nlohmann::json::parse(
      prunecal::ReadFileBytes(dir / "syn" / "surrogate.json"));
  CHECK(surrogate.at("num_tokens") == 24);
  CHECK(prunecal::ReadFeatureFile(features).num_tokens == 24);

  const auto kept = dir / "kept.txt";
  CHECK(Run("select --features " + features.string() +
                " --strategy coverage_saliency -K 5 --alpha 0.5 --p 1.5"
                " --out " + kept.string(),
            log) == 0);
  const std::string text = prunecal::ReadFileBytes(kept);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);

  CHECK(Run("select --features " + features.string() +
                " --strategy coverage_saliency -K 25",
            log) == 2);
  CHECK(Run("select --features " + features.string() +
                " --strategy bogus -K 2",
            log) == 1);
  CHECK(Run("select --features " + (dir / "missing.pcf").string() +
                " --strategy random -K 2",
            log) == 2);
  CHECK(prunecal::ReadFileBytes(log).find("missing.pcf") != std::string::npos);
  prunecal::WriteFileBytes(dir / "bad.pcf", "XXXXjunk");
  CHECK(Run("select --features " + (dir / "bad.pcf").string() +
                " --strategy random -K 2",
            log) == 2);

  prunecal::WriteFileBytes(
      dir / "p.jsonl",
      "{\"example_id\":\"a\",\"split\":\"random\",\"true_label\":\"yes\","
      "\"probs\":{\"yes\":0.9,\"no\":0.1}}\n"
      "{\"example_id\":\"b\",\"split\":\"popular\",\"true_label\":\"no\","
      "\"probs\":{\"yes\":0.9,\"no\":0.1}}\n"
      "{\"example_id\":\"c\",\"split\":\"random\",\"true_label\":\"yes\","
      "\"probs\":{\"yes\":0.6,\"no\":0.4}}\n");
  CHECK(Run("metrics --predictions " + (dir / "p.jsonl").string() +
                " --resamples 50 --folds 2 --out " + (dir / "m").string(),
            log) == 0);
  const auto report =
      nlohmann::json::parse(prunecal::ReadFileBytes(dir / "m" / "report.json"));
  CHECK(report.at("num_records") == 3);
  CHECK(fs::exists(dir / "m" / "bins.csv"));
  CHECK(fs::exists(dir / "m" / "risk_coverage.csv"));

  CHECK(Run("splits --predictions " + (dir / "p.jsonl").string() +
                " --resamples 20 --out " + (dir / "s").string(),
            log) == 0);
  CHECK(prunecal::ReadFileBytes(dir / "s" / "splits.csv").find("popular") !=
        std::string::npos);

  prunecal::WriteFileBytes(dir / "bad.jsonl", "{\"example_id\":1}\n");
  CHECK(Run("metrics --predictions " + (dir / "bad.jsonl").string(), log) ==
        2);
  CHECK(prunecal::ReadFileBytes(log).find("line 1") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli sweep honours flags, env and config") {
  const auto dir = testutil::ScratchDir("cli_sweep");
  const auto log = dir / "log.txt";
  const nlohmann::json config = {
      {"data",
       {{"source", "surrogate"},
        {"surrogate",
         {{"num_tokens", 24},
          {"dim", 8},
          {"num_evidence_clusters", 3},
          {"num_distractor_clusters", 3},
          {"num_examples", 40}}}}},
      {"strategies", {"coverage_saliency", "random"}},
      {"budgets", {4, 8}},
      {"alphas", {0, 1}},
      {"seeds", {0, 1}},
      {"resamples", 30}};
  prunecal::WriteFileBytes(dir / "cfg.json", config.dump());
  const std::string base = "sweep --config " + (dir / "cfg.json").string();

  REQUIRE(Run(base + " --out " + (dir / "a").string(), log) == 0);
  REQUIRE(Run(base + " --out " + (dir / "b").string() + " --workers 3", log,
              "PRUNECAL_WORKERS=2") == 0);
  CHECK(prunecal::ReadFileBytes(dir / "a" / "results.csv") ==
        prunecal::ReadFileBytes(dir / "b" / "results.csv"));
  auto manifest_a = nlohmann::json::parse(
      prunecal::ReadFileBytes(dir / "a" / "manifest.json"));
  auto manifest_b = nlohmann::json::parse(
      prunecal::ReadFileBytes(dir / "b" / "manifest.json"));
  manifest_a["config"].erase("output_dir");
  manifest_b["config"].erase("output_dir");
  CHECK(manifest_a == manifest_b);

  // Flags win over the config file.
  REQUIRE(Run(base + " --out " + (dir / "c").string() +
                  " --budgets 6 --strategies saliency_only",
              log) == 0);
  const std::string results = prunecal::ReadFileBytes(dir / "c" / "results.csv");
  CHECK(results.find("saliency_only,6,") != std::string::npos);
  CHECK(results.find("coverage_saliency") == std::string::npos);

  // List flags take comma-separated values.
  REQUIRE(Run(base + " --out " + (dir / "g").string() +
                  " --strategies coverage_saliency --budgets 4,8"
                  " --alphas 0,0.5,1",
              log) == 0);
  const std::string grid = prunecal::ReadFileBytes(dir / "g" / "results.csv");
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 7);

  // Re-running from a manifest reproduces the outputs.
  REQUIRE(Run("sweep --config " + (dir / "a" / "manifest.json").string() +
                  " --out " + (dir / "d").string(),
              log) == 0);
  CHECK(prunecal::ReadFileBytes(dir / "a" / "results.csv") ==
        prunecal::ReadFileBytes(dir / "d" / "results.csv"));

  CHECK(Run(base + " --out " + (dir / "e").string(), log,
            "PRUNECAL_WORKERS=zero") == 1);
  CHECK(Run(base + " --budgets 99", log) == 2);
  prunecal::WriteFileBytes(dir / "broken.json", "{\"budgets\": [");
  CHECK(Run("sweep --config " + (dir / "broken.json").string(), log) == 1);
  CHECK(Run("sweep --config " + (dir / "absent.json").string(), log) == 2);

  const nlohmann::json files = {
      {"data",
       {{"source", "files"},
        {"predictions_dir", (dir / "nothing").string()}}},
      {"budgets", {4}},
      {"alphas", {1}}};
  prunecal::WriteFileBytes(dir / "files.json", files.dump());
  CHECK(Run("sweep --config " + (dir / "files.json").string() + " --out " +
                (dir / "f").string(),
            log) == 2);
  CHECK(prunecal::ReadFileBytes(log).find("coverage_saliency_K4_a1_p1.jsonl") !=
        std::string::npos);
  fs::remove_all(dir);
}
