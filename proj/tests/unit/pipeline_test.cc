// Copyright 2026 The Compass Authors.
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

#include "compass/pipeline.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "compass/binary_io.h"
#include "compass/errors.h"
#include "json.hpp"

namespace compass {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const fs::path kDataDir = COMPASS_DATA_DIR;
const fs::path kDemo = kDataDir / "demo" / "demo.json";
const fs::path kGoldenDir = fs::path(COMPASS_GOLDEN_DIR) / "demo";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("compass_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

RunConfig config(const std::string& modules, const fs::path& out) {
  Json doc = Json::parse(R"({
    "version": 1, "seed": 3,
    "models": ["../fixtures/tiny_mlp.model", "../fixtures/tiny_cnn.model"],
    "dataset": "../fixtures/synth8x8_test"
  })");
  doc["modules"] = Json::parse(modules);
  RunConfig c = parse_run_config(doc.dump(), kDataDir / "demo");
  c.output = out;
  return c;
}

TEST(Pipeline, MetricsOnlyRunWritesMetricsAndSummary) {
  const fs::path out = scratch("metrics");
  const RunResult r = run_pipeline(config(R"({"metrics": {}})", out));
  EXPECT_EQ(r.files, (std::vector<std::string>{kMetricsCsv, kSummaryJson}));
  EXPECT_EQ(listing(out), (std::vector<std::string>{kMetricsCsv, kSummaryJson}));
  EXPECT_FALSE(r.radar);

  const Json summary = Json::parse(slurp(out / kSummaryJson));
  EXPECT_EQ(summary["modules"], Json::array({"metrics"}));
  EXPECT_EQ(summary["metrics"]["tiny-mlp"]["accuracy"], 161.0 / 200.0);
  EXPECT_EQ(summary["metrics"]["tiny-cnn"]["accuracy"], 165.0 / 200.0);
  EXPECT_FALSE(summary.contains("radar"));

  const std::string csv = slurp(out / kMetricsCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), report_csv_header());
}

TEST(Pipeline, StaleOutputsAreRemoved) {
  const fs::path out = scratch("stale");
  fs::create_directories(out / "heatmaps" / "old");
  write_text(out / kRadarSvg, "old");
  write_text(out / kIncompleteMarker, "old");
  write_text(out / "notes.txt", "kept");
  run_pipeline(config(R"({"metrics": {}})", out));
  EXPECT_EQ(listing(out), (std::vector<std::string>{kMetricsCsv, "notes.txt", kSummaryJson}));
}

TEST(Pipeline, FailingModuleLeavesAMarkerAndNoSummary) {
  const fs::path out = scratch("failing");
  // An epsilon this small never reaches a decision boundary.
  RunConfig c = config(R"({"metrics": {}, "attribution": {"methods": ["big"], "samples": 2,
                            "big_epsilon": 1e-9}})", out);
  EXPECT_THROW(run_pipeline(c), NotFoundError);
  EXPECT_EQ(listing(out), (std::vector<std::string>{kIncompleteMarker, kMetricsCsv}));
  EXPECT_NE(slurp(out / kIncompleteMarker).find("module attribution failed"), std::string::npos);
}

TEST(Pipeline, RadarFollowsTheAxisValues) {
  const fs::path out = scratch("radar");
  RunConfig c = load_run_config(kDemo);
  c.output = out;
  const RunResult r = run_pipeline(c);
  ASSERT_TRUE(r.radar);
  const ModuleScores& s = *r.radar;
  EXPECT_EQ(s.axes, (std::vector<std::string>{"Basic Metrics", "Basic Mutants", "Robustness",
                                              "Interpretability", "Neuron Analysis"}));
  EXPECT_EQ(s.directions[2], Direction::kLowerBetter);
  EXPECT_EQ(s.scores, radar_scores(s.values, s.directions));

  // The summary agrees with the CSVs it was built from.
  const Json summary = Json::parse(slurp(out / kSummaryJson));
  for (std::size_t m = 0; m < s.models.size(); ++m) {
    const std::string& name = s.models[m];
    EXPECT_EQ(summary["radar"]["models"][name]["values"][0].get<double>(),
              summary["metrics"][name]["precision"].get<double>());
    EXPECT_EQ(summary["radar"]["models"][name]["values"][2].get<double>(),
              summary["attacks"][name]["average_white_box"].get<double>());
    EXPECT_EQ(summary["radar"]["models"][name]["values"][3].get<double>(),
              summary["attribution"][name]["average_insertion"].get<double>());
  }
  EXPECT_NE(slurp(out / kRadarSvg).find("<svg"), std::string::npos);
}

TEST(Pipeline, DemoIsDeterministicAndMatchesGoldens) {
  RunConfig c = load_run_config(kDemo);
  c.output = scratch("demo_a");
  const RunResult a = run_pipeline(c);
  c.output = scratch("demo_b");
  const RunResult b = run_pipeline(c);
  ASSERT_EQ(a.files, b.files);
  EXPECT_EQ(a.files, (std::vector<std::string>{kMetricsCsv, kMutantsCsv, kAttacksCsv,
                                               kAttributionCsv, kPruningCsv, kSummaryJson,
                                               kRadarSvg}));
  const bool update = std::getenv("COMPASS_UPDATE_GOLDENS") != nullptr;
  if (update) fs::create_directories(kGoldenDir);
  for (const std::string& f : a.files) {
    const std::string bytes = slurp(a.output / f);
    EXPECT_EQ(bytes, slurp(b.output / f)) << f;
    if (update) {
      write_text(kGoldenDir / f, bytes);
    } else {
      ASSERT_TRUE(fs::exists(kGoldenDir / f)) << f;
      EXPECT_EQ(bytes, slurp(kGoldenDir / f)) << f;
    }
  }
}

// Runs the command-line tool and returns its exit status.
int cli(const std::string& args) {
  const std::string cmd = std::string(COMPASS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitStatus) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  const std::string mlp = (kDataDir / "fixtures" / "tiny_mlp.model").string();
  const std::string data = (kDataDir / "fixtures" / "synth8x8_test").string();

  EXPECT_EQ(cli("metrics --model " + mlp + " --data " + data + " --out " + (dir / "m.csv").string()), 0);
  EXPECT_EQ(slurp(dir / "m.csv").substr(0, report_csv_header().size()), report_csv_header());
  EXPECT_EQ(cli("prune --method magnitude --rates 0,0.1 --model " + mlp + " --data " + data +
                " --out " + (dir / "p.csv").string()),
            0);

  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("metrics --model " + mlp), 1);
  EXPECT_EQ(cli("prune --method asl --model " + mlp + " --data " + data + " --out x.csv"), 1);
  EXPECT_EQ(cli("prune --method taylor --rates 1.5 --model " + mlp + " --data " + data +
                " --out x.csv"),
            1);
  write_text(dir / "bad.json", R"({"version": 1, "modules": {}})");
  EXPECT_EQ(cli("run " + (dir / "bad.json").string()), 1);

  write_text(dir / "corrupt.model", "not a model");
  EXPECT_EQ(cli("metrics --model " + (dir / "corrupt.model").string() + " --data " + data +
                " --out " + (dir / "c.csv").string()),
            2);
}

}  // namespace
}  // namespace compass
