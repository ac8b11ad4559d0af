// Copyright 2026 The weaklabel Authors.
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


#include <gtest/gtest.h>
#include <sys/wait.h>

#include "support/benchmark_tables.hpp"
#include "support/oracles.hpp"

using namespace weaklabel;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run_cli(const oracle::TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  std::string cmd = std::string("'") + WEAKLABEL_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = oracle::read_file(out);
  o.err = oracle::read_file(err);
  return o;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

void write_json(const std::filesystem::path& p, const Json& j) { oracle::write_file(p, j.dump(2)); }

Json sim_spec_json(double sub_rate) {
  Json gens = Json::array();
  for (int g = 0; g < 3; ++g) gens.push_back({{"generator_id", "mock-" + std::to_string(g)}, {"sub_rate", sub_rate}, {"seed", g}});
  return {{"utterances", 30}, {"utterances_per_audio", 5}, {"max_words", 8}, {"seed", 3}, {"generators", gens}};
}

/// Simulates into dir/sim and writes matching mock generator specs.
void simulate_into(const oracle::TempDir& dir) {
  write_json(dir / "spec.json", sim_spec_json(0.1));
  ASSERT_EQ(run_cli(dir, "simulate --quiet --spec " + q(dir / "spec.json") + " --out " + q(dir / "sim")).code, 0);
  Json gens = Json::array();
  for (int g = 0; g < 3; ++g) {
    gens.push_back({{"generator_id", "m" + std::to_string(g)}, {"kind", "mock_noisy"}, {"sub_rate", 0.1},
                    {"seed", g}, {"reference", "sim/truth.jsonl"}});
  }
  write_json(dir / "generators.json", gens);
}

}  // namespace

TEST(Cli, MissingSubcommandOrFlagIsUsageError) {
  oracle::TempDir dir;
  EXPECT_EQ(run_cli(dir, "").code, 1);
  EXPECT_EQ(run_cli(dir, "label --corpus x.jsonl").code, 1);
  EXPECT_EQ(run_cli(dir, "no-such-command").code, 1);
  EXPECT_EQ(run_cli(dir, "--help").code, 0);
}

TEST(Cli, SimulateWritesReport) {
  oracle::TempDir dir;
  write_json(dir / "spec.json", sim_spec_json(0.05));
  auto o = run_cli(dir, "simulate --quiet --spec " + q(dir / "spec.json") + " --out " + q(dir / "sim"));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("admitted fraction"), std::string::npos);
  auto report = load_json_file(dir / "sim" / "report.json");
  EXPECT_GT(report["quality"]["admitted_fraction"].get<double>(), 0.0);
  EXPECT_TRUE(load_manifest(dir / "sim" / kChunksFile).size() > 0);
}

TEST(Cli, LabelCreatesIterationsAndLogs) {
  oracle::TempDir dir;
  simulate_into(dir);
  const std::string args = "label --corpus " + q(dir / "sim" / "corpus.jsonl") + " --generators " +
                           q(dir / "generators.json") + " --out " + q(dir / "runs");
  auto first = run_cli(dir, args);
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_NE(first.err.find("event=audio_done"), std::string::npos);
  auto second = run_cli(dir, args + " --quiet --workers 2");
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_TRUE(second.err.empty());
  EXPECT_EQ(oracle::read_file(dir / "runs" / "iter-001" / kChunksFile),
            oracle::read_file(dir / "runs" / "iter-002" / kChunksFile));
  auto record = load_json_file(dir / "runs" / "iter-002" / kRunFile);
  EXPECT_EQ(record["previous"], "iter-001");
}

TEST(Cli, LabelConfigOverlayAndEnvironment) {
  oracle::TempDir dir;
  simulate_into(dir);
  write_json(dir / "config.json", {{"pwer_threshold", 0.0}, {"pcer_threshold", 0.0}});
  const std::string env = "WEAKLABEL_LABEL_QUIET=1 ";
  const std::string cmd = std::string("cd ") + q(dir.path()) + " && " + env + "'" + WEAKLABEL_CLI_PATH +
                          "' label --corpus sim/corpus.jsonl --generators generators.json --config config.json --out runs"
                          " 2>stderr.txt >/dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(oracle::read_file(dir / "stderr.txt").empty());
  auto record = load_json_file(dir / "runs" / "iter-001" / kRunFile);
  EXPECT_EQ(record["config"]["pwer_threshold"], 0.0);
  EXPECT_EQ(record["config"]["max_segment_len"], 5.0);
}

TEST(Cli, LabelRejectsBadConfig) {
  oracle::TempDir dir;
  simulate_into(dir);
  write_json(dir / "config.json", {{"max_segment_len", 20.0}});
  auto o = run_cli(dir, "label --quiet --corpus " + q(dir / "sim" / "corpus.jsonl") + " --generators " +
                            q(dir / "generators.json") + " --config " + q(dir / "config.json") + " --out " + q(dir / "runs"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("error:"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir / "runs"));

  write_json(dir / "gated.json", {{"ppl_threshold", 100.0}});
  o = run_cli(dir, "label --quiet --corpus " + q(dir / "sim" / "corpus.jsonl") + " --generators " +
                       q(dir / "generators.json") + " --config " + q(dir / "gated.json") + " --out " + q(dir / "runs"));
  EXPECT_EQ(o.code, 1);
}

TEST(Cli, LabelPartialFailureExitsTwo) {
  oracle::TempDir dir;
  simulate_into(dir);
  auto text = oracle::read_file(dir / "sim" / "corpus.jsonl");
  Json broken = Json::parse(text.substr(0, text.find('\n')));
  broken["id"] = "broken";
  broken["vad"] = "missing.vad.jsonl";
  oracle::write_file(dir / "sim" / "corpus.jsonl", text + broken.dump() + "\n");
  auto o = run_cli(dir, "label --quiet --corpus " + q(dir / "sim" / "corpus.jsonl") + " --generators " +
                            q(dir / "generators.json") + " --out " + q(dir / "runs"));
  EXPECT_EQ(o.code, 2);
  auto record = load_json_file(dir / "runs" / "iter-001" / kRunFile);
  ASSERT_EQ(record["failures"].size(), 1u);
  EXPECT_EQ(record["failures"][0]["audio_id"], "broken");
}

TEST(Cli, TrainLmRoundTrips) {
  oracle::TempDir dir;
  oracle::write_file(dir / "text.txt", "abc abd\nabe abc\n\nbca\n");
  auto o = run_cli(dir, "train-lm --corpus " + q(dir / "text.txt") + " --out " + q(dir / "lm.json") + " --order 2");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("3 lines"), std::string::npos);
  auto lm = NgramLM::load(dir / "lm.json");
  EXPECT_EQ(lm.order(), 2);
  EXPECT_EQ(run_cli(dir, "train-lm --corpus " + q(dir / "none.txt") + " --out " + q(dir / "x.json")).code, 1);
}

TEST(Cli, EvaluateAgainstBaselines) {
  oracle::TempDir dir;
  oracle::write_file(dir / "pairs.jsonl",
                     "{\"utterance_id\": \"1\", \"reference\": \"a b c d\", \"prediction\": \"a b x d\", \"dataset_tag\": \"SADA\"}\n"
                     "{\"utterance_id\": \"2\", \"reference\": \"e f\", \"prediction\": \"e f\", \"dataset_tag\": \"MGB-2\"}\n");
  ModelReport base;
  base.model_name = "base";
  base.datasets = {{"SADA", 50, 20}, {"MGB-2", 10, 10}};
  write_json(dir / "base.json", to_json(base));
  write_json(dir / "expected.json", {{"SADA", {{"werr", 50.0}}}});
  auto o = run_cli(dir, "evaluate --pairs " + q(dir / "pairs.jsonl") + " --baseline " + q(dir / "base.json") +
                            " --expected " + q(dir / "expected.json") + " --out " + q(dir / "report.json"));
  ASSERT_EQ(o.code, 0) << o.err;
  auto report = load_json_file(dir / "report.json");
  EXPECT_EQ(report["expected_diff"][0]["matches"], true);
  EXPECT_NE(o.out.find("SADA"), std::string::npos);

  // A dataset the baseline does not have is a warning and a partial exit.
  oracle::write_file(dir / "pairs.jsonl",
                     oracle::read_file(dir / "pairs.jsonl") +
                         "{\"utterance_id\": \"3\", \"reference\": \"g\", \"prediction\": \"g\", \"dataset_tag\": \"Other\"}\n");
  o = run_cli(dir, "evaluate --pairs " + q(dir / "pairs.jsonl") + " --baseline " + q(dir / "base.json") + " --out " +
                       q(dir / "report.json"));
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("warning:"), std::string::npos);
}

TEST(Cli, EvaluateOnSubsetOfBaselineDatasets) {
  oracle::TempDir dir;
  oracle::write_file(dir / "pairs.jsonl",
                     "{\"utterance_id\": \"1\", \"reference\": \"a b\", \"prediction\": \"a x\", \"dataset_tag\": \"MGB-2\"}\n");
  write_json(dir / "base.json", to_json(bench::report(bench::kStrongestBaseline)));
  auto o = run_cli(dir, "evaluate --pairs " + q(dir / "pairs.jsonl") + " --baseline " + q(dir / "base.json") + " --out " +
                            q(dir / "report.json"));
  EXPECT_EQ(o.code, 2) << o.err;
  EXPECT_NE(o.err.find("comparing on 1 of 6"), std::string::npos);
  auto report = load_json_file(dir / "report.json");
  ASSERT_EQ(report["reduction"]["cells"].size(), 2u);
}

TEST(Cli, EvaluateReproducesPublishedReductionsFromBaselineTable) {
  oracle::TempDir dir;
  Json all = Json::array();
  for (const auto& m : bench::reports(0, bench::baseline_rows().size())) all.push_back(to_json(m));
  write_json(dir / "baselines.json", all);
  // Perfect predictions: every reduction against the best baseline is 100%.
  std::string pairs;
  for (const auto& d : standard_datasets())
    pairs += Json{{"utterance_id", d}, {"reference", "a"}, {"prediction", "a"}, {"dataset_tag", d}}.dump() + "\n";
  oracle::write_file(dir / "pairs.jsonl", pairs);
  auto o = run_cli(dir, "evaluate --pairs " + q(dir / "pairs.jsonl") + " --baseline " + q(dir / "baselines.json") +
                            " --out " + q(dir / "report.json"));
  ASSERT_EQ(o.code, 0) << o.err;
  auto report = load_json_file(dir / "report.json");
  EXPECT_EQ(report["baselines"].size(), bench::baseline_rows().size());
  EXPECT_NE(o.out.find("100.00"), std::string::npos);
}

TEST(Cli, CalibrateWritesTraceAndBestConfig) {
  oracle::TempDir dir;
  simulate_into(dir);
  std::string samples;
  std::map<std::string, std::string> refs;
  for (const auto& w : read_timed_texts(dir / "sim" / "truth.jsonl")) {
    auto& r = refs[w.parent_id];
    r += (r.empty() ? "" : " ") + w.text;
  }
  for (const auto& e : read_corpus(dir / "sim" / "corpus.jsonl"))
    samples += to_json(CalibrationSample{e, refs.at(e.audio.id)}).dump() + "\n";
  oracle::write_file(dir / "samples.jsonl", samples);
  write_json(dir / "space.json",
             {{"mode", "grid"}, {"budget", 4}, {"pwer_threshold", {0.0, 0.5}}, {"max_segment_len", {3.0, 5.0}}});
  auto o = run_cli(dir, "calibrate --space " + q(dir / "space.json") + " --samples " + q(dir / "samples.jsonl") +
                            " --generators " + q(dir / "generators.json") + " --out " + q(dir / "trace.jsonl") +
                            " --best-config " + q(dir / "best.json") + " --segment-references " +
                            q(dir / "sim" / "truth.jsonl"));
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream trace(oracle::read_file(dir / "trace.jsonl"));
  std::size_t lines = 0;
  for (std::string line; std::getline(trace, line);) ++lines;
  EXPECT_EQ(lines, 4u);
  auto best = load_config(dir / "best.json");
  EXPECT_EQ(best.pwer_threshold, 0.5);
}
