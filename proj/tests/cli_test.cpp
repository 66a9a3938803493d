// Copyright 2026 The FFCI Authors.
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

#include "ffci/annotation.hpp"
#include "ffci/nsp_pairs.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = FFCI_TEST_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::path(testing::TempDir()) / ("ffci_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  std::string cmd = std::string("\"") + FFCI_CLI + "\" " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string eval_args(const fs::path& out) {
  return "eval --dataset " + (kData / "fixture_dataset.jsonl").string() + " --cache-only --cache-dir " +
         (kData / "cache").string() + " --out " + out.string();
}

}  // namespace

TEST(Cli, EvalCacheOnlyWritesReports) {
  auto out = fresh_dir("eval");
  ASSERT_EQ(run(eval_args(out)), 0);
  auto csv = slurp(out / "report.csv");
  EXPECT_EQ(csv.rfind("system,R-1,R-2,R-L,Fa,Fo,C,IC\n", 0), 0u) << csv;
  EXPECT_NE(csv.find("\noneline,"), std::string::npos);
  EXPECT_NE(csv.find(",---\npg,"), std::string::npos) << csv;
  EXPECT_TRUE(fs::exists(out / "report.md"));
  EXPECT_TRUE(fs::exists(out / "report.json"));

  auto again = fresh_dir("eval_again");
  ASSERT_EQ(run(eval_args(again)), 0);
  for (const char* f : {"report.json", "report.md", "report.csv"})
    EXPECT_EQ(slurp(out / f), slurp(again / f)) << f;

  auto rendered = fresh_dir("rendered");
  ASSERT_EQ(run("report --in " + (out / "report.json").string() + " --format csv --out " +
                rendered.string()),
            0);
  EXPECT_EQ(slurp(rendered / "report.csv"), csv);
}

TEST(Cli, PlanRequestsMatchesCommittedFixture) {
  auto out = fresh_dir("plan");
  ASSERT_EQ(run("eval --dataset " + (kData / "fixture_dataset.jsonl").string() +
                " --plan-requests " + (out / "requests.jsonl").string()),
            0);
  EXPECT_EQ(slurp(out / "requests.jsonl"), slurp(kData / "fixture_requests.jsonl"));
}

TEST(Cli, ExitCodes) {
  auto out = fresh_dir("codes");
  EXPECT_EQ(run("eval --bogus-flag"), 1);
  EXPECT_EQ(run(eval_args(out) + " --aspects fa,xx"), 1);
  EXPECT_EQ(run(eval_args(out) + " --lambda 2"), 1);
  EXPECT_EQ(run("eval --dataset " + (out / "missing.jsonl").string() + " --cache-only"), 2);
  EXPECT_EQ(run(eval_args(out) + " --layer fa=11"), 3);
  EXPECT_EQ(run(eval_args(out) + " --model fa=unknown-model --layer fa=3"), 3);
  EXPECT_EQ(run("metaeval --out " + out.string()), 1);
}

TEST(Cli, NspPairs) {
  auto out = fresh_dir("nsp");
  auto dataset = (kData / "fixture_dataset.jsonl").string();
  ASSERT_EQ(run("nsp-pairs --dataset " + dataset +
                " --variant 5 --positives 5 --negatives 10 --seed 3 --out " + out.string()),
            0);
  std::ifstream in(out / "nsp_pairs.jsonl");
  auto pairs = ffci::read_nsp_pairs(in);
  EXPECT_EQ(pairs.size(), 15u);
  auto first = slurp(out / "nsp_pairs.jsonl");
  ASSERT_EQ(run("nsp-pairs --dataset " + dataset +
                " --variant 5 --positives 5 --negatives 10 --seed 3 --out " + out.string()),
            0);
  EXPECT_EQ(slurp(out / "nsp_pairs.jsonl"), first);
  EXPECT_EQ(run("nsp-pairs --dataset " + dataset +
                " --variant 1 --positives 1000 --negatives 0 --out " + out.string()),
            2);
  EXPECT_EQ(run("nsp-pairs --dataset " + dataset +
                " --variant 9 --positives 1 --negatives 1 --out " + out.string()),
            1);
}

TEST(Cli, MetaevalSelectionAndAnnotations) {
  auto out = fresh_dir("meta");
  ASSERT_EQ(run("metaeval --table " + (kData / "faithfulness_layer_table.csv").string() +
                " --out " + out.string()),
            0);
  auto sel = nlohmann::json::parse(slurp(out / "selection.json"));
  EXPECT_EQ(sel["selected"]["model"], "roberta-base");
  EXPECT_EQ(sel["selected"]["layer"], 10);
  EXPECT_TRUE(fs::exists(out / "layer_curve_roberta-base.csv"));

  std::vector<ffci::AnnotationRecord> recs;
  for (int k = 0; k < 10; ++k)
    recs.push_back({"ctl" + std::to_string(k), "w1", ffci::Aspect::focus,
                    k < 8 ? 95.0 : 0.0, true, 100.0, std::nullopt});
  const double raw[] = {10, 40, 20, 80};
  for (int i = 0; i < 4; ++i)
    recs.push_back({"item" + std::to_string(i), "w1", ffci::Aspect::focus, raw[i], false,
                    std::nullopt, std::nullopt});
  {
    std::ofstream a(out / "ann.jsonl");
    ffci::write_annotations(a, recs);
    std::ofstream s(out / "scores.csv");
    s << "item_id,score\nitem0,0.1\nitem1,0.3\nitem2,0.2\nitem3,0.9\n";
  }
  ASSERT_EQ(run("metaeval --annotations " + (out / "ann.jsonl").string() +
                " --aspect focus --scores " + (out / "scores.csv").string() + " --out " +
                out.string()),
            0);
  auto corr = nlohmann::json::parse(slurp(out / "correlation.json"));
  EXPECT_EQ(corr["n"], 4);
  EXPECT_DOUBLE_EQ(corr["spearman"].get<double>(), 1.0);
  EXPECT_EQ(slurp(out / "quality_control.csv"), "hit_id,correct,passed\nw1/focus,8,true\n");
}
