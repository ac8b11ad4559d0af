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


// Command-line front end: label, calibrate, evaluate, simulate, train-lm.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 partial failure.
// Every flag can also be set through WEAKLABEL_<COMMAND>_<FLAG>, e.g.
// WEAKLABEL_LABEL_WORKERS=8.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "weaklabel/weaklabel.hpp"

using namespace weaklabel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;

std::string env_name(const std::string& command, std::string flag) {
  for (auto& c : flag) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::string cmd = command;
  for (auto& c : cmd) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return "WEAKLABEL_" + cmd + "_" + flag;
}

template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option("--" + name, target, help)->envname(env_name(app->get_name(), name));
}

RunOptions run_options(std::size_t workers, bool quiet) {
  RunOptions o;
  o.workers = workers == 0 ? default_workers() : workers;
  if (quiet) o.log = nullptr;
  return o;
}

std::unique_ptr<NgramLM> maybe_load_lm(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_unique<NgramLM>(NgramLM::load(path));
}

void require_lm_if_gated(const PipelineConfig& config, const LanguageModel* lm) {
  if (!std::isinf(config.ppl_threshold) && !lm)
    throw UsageError("ppl_threshold is finite but no --lm was given");
}

struct LabelArgs {
  std::string corpus, config, generators, out, lm;
  std::size_t workers = 1;
  bool quiet = false;
};

int run_label(const LabelArgs& a) {
  PipelineConfig config = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  require_valid(config);
  auto lm = maybe_load_lm(a.lm);
  require_lm_if_gated(config, lm.get());
  auto corpus = read_corpus(a.corpus);
  auto generators = make_generators(load_generator_specs(a.generators));
  auto it = run_iteration(a.out, corpus, generators, lm.get(), config, run_options(a.workers, a.quiet));
  const auto& s = it.run.summary;
  std::cout << "iteration " << it.index << " -> " << it.dir.string() << '\n'
            << "audios processed " << s.audios_processed << ", skipped " << s.audios_skipped << '\n'
            << "segments " << s.segments_created << ", admitted " << s.count(Decision::admitted) << ", chunks "
            << s.chunks_emitted << ", admitted hours " << s.admitted_hours() << '\n';
  for (const auto& v : s.conservation_violations()) std::cerr << "conservation violated: " << v << '\n';
  if (!s.conservation_violations().empty()) return kExitPartial;
  return s.audios_skipped ? kExitPartial : kExitOk;
}

struct CalibrateArgs {
  std::string space, samples, generators, out, lm, segment_references, best_config;
  std::size_t workers = 1;
};

int run_calibrate(const CalibrateArgs& a) {
  SearchSpace space = search_space_from_json(load_json_file(a.space));
  CalibrationSet set;
  set.samples = read_calibration_samples(a.samples);
  set.generators = make_generators(load_generator_specs(a.generators));
  if (!a.segment_references.empty())
    set.segment_references = load_transcript_source(a.segment_references, LookupMode::timed_words);
  auto lm = maybe_load_lm(a.lm);
  set.lm = lm.get();
  if (!lm) {
    for (const auto& d : space.dimensions) {
      if (d.parameter == Hyperparameter::ppl_threshold) throw UsageError("ppl_threshold is searched but no --lm was given");
    }
    require_lm_if_gated(space.base, nullptr);
  }
  ManifestWriter trace(a.out);
  std::size_t invalid = 0;
  auto result = calibrate(space, set, a.workers == 0 ? default_workers() : a.workers, [&](const CandidateResult& r) {
    trace.write_json(to_json(r));
    if (!r.valid) ++invalid;
  });
  trace.flush();
  if (!a.best_config.empty()) save_config(result.best_config, a.best_config);
  std::cout << "mode " << (result.mode == SearchMode::grid ? "grid" : "random") << ", candidates "
            << result.trace.size() << ", invalid " << invalid << '\n'
            << "best candidate " << result.best_index << " score " << result.best_score << '\n'
            << to_json(result.best_config).dump(2) << '\n';
  return invalid ? kExitPartial : kExitOk;
}

struct EvaluateArgs {
  std::string pairs, baseline, out, expected, name = "ours";
  double tolerance = 0.05;
  bool strict_normalization = false;
};

int run_evaluate(const EvaluateArgs& a) {
  auto baselines = load_model_reports(a.baseline);
  auto policy = a.strict_normalization ? NormalizationPolicy::strict() : NormalizationPolicy::agreement();
  auto eval = evaluate_pairs(read_eval_pairs(a.pairs), policy, baselines.front().columns(), a.name, default_workers());
  if (eval.report.datasets.empty()) throw UsageError("no pairs match a baseline dataset");
  if (eval.report.columns() != baselines.front().columns()) {
    eval.warnings.push_back("comparing on " + std::to_string(eval.report.datasets.size()) + " of " +
                            std::to_string(baselines.front().datasets.size()) +
                            " baseline datasets; the Average column covers only those");
    for (auto& b : baselines) b = restrict_to_columns(b, eval.report.columns());
  }
  for (const auto& w : eval.warnings) std::cerr << "warning: " << w << '\n';
  auto table = baselines.size() == 1 ? reduction_table(baselines.front(), eval.report)
                                     : reduction_against_best(baselines, eval.report);
  Json report{{"model", to_json(eval.report)}, {"reduction", to_json(table)}, {"warnings", eval.warnings}};
  Json baseline_json = Json::array();
  for (const auto& b : baselines) baseline_json.push_back(to_json(b));
  report["baselines"] = std::move(baseline_json);
  if (!a.expected.empty()) {
    Json diffs = Json::array();
    for (const auto& d : compare_to_expected(table, expected_cells_from_json(load_json_file(a.expected)), a.tolerance)) {
      diffs.push_back(to_json(d));
      if (!d.matches) {
        std::cerr << "mismatch: " << d.dataset << ' ' << to_string(d.metric) << " computed " << format_rate(d.computed)
                  << " expected " << format_rate(d.expected) << '\n';
      }
    }
    report["expected_diff"] = std::move(diffs);
  }
  save_json_file(report, a.out);
  std::vector<ModelReport> rows = baselines;
  rows.push_back(eval.report);
  std::cout << format_rate_table(rows, false) << '\n' << format_rate_table(rows, true) << '\n'
            << format_reduction_table(table);
  return eval.warnings.empty() ? kExitOk : kExitPartial;
}

struct SimulateArgs {
  std::string spec, config, out;
  std::size_t workers = 1;
  bool quiet = false;
};

int run_simulate(const SimulateArgs& a) {
  auto spec = simulation_spec_from_json(load_json_file(a.spec));
  PipelineConfig config = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  auto result = simulate(spec, config, run_options(a.workers, a.quiet));
  write_simulation(result, a.out);
  const auto& q = result.quality;
  std::cout << "admitted fraction " << q.admitted_fraction << ", label WER " << q.label_wer
            << ", mean single-generator WER " << q.mean_generator_wer << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string corpus, out, unit = "character";
  int order = 3;
  double k = 1.0;
};

int run_train_lm(const TrainArgs& a) {
  std::ifstream in(a.corpus);
  if (!in) throw IoError("cannot open '" + a.corpus + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  auto lm = train_ngram_lm(lines, a.order, a.k, parse_unit_kind(a.unit));
  lm.save(a.out);
  std::cout << "trained order-" << a.order << ' ' << a.unit << " LM on " << lines.size() << " lines, "
            << lm.outcome_count() << " outcomes\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weaklabel: weak-label generation for speech corpora"};
  app.require_subcommand(1);

  LabelArgs label;
  auto* l = app.add_subcommand("label", "Run the labeling pipeline into a new iteration directory");
  flag(l, "corpus", label.corpus, "Corpus manifest (JSONL)")->required();
  flag(l, "config", label.config, "Pipeline config (JSON)");
  flag(l, "generators", label.generators, "Generator specs (JSON array)")->required();
  flag(l, "out", label.out, "Output root; runs go to <out>/iter-NNN")->required();
  flag(l, "lm", label.lm, "Perplexity LM file");
  flag(l, "workers", label.workers, "Worker threads (0 = hardware concurrency)");
  l->add_flag("--quiet", label.quiet, "No progress lines on stderr")->envname(env_name("label", "quiet"));

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Search pipeline hyperparameters");
  flag(c, "space", cal.space, "Search space (JSON)")->required();
  flag(c, "samples", cal.samples, "Calibration samples (JSONL)")->required();
  flag(c, "generators", cal.generators, "Replay generator specs (JSON array)")->required();
  flag(c, "out", cal.out, "Score trace (JSONL)")->required();
  flag(c, "lm", cal.lm, "Perplexity LM file");
  flag(c, "segment-references", cal.segment_references, "Time-aligned reference words (JSONL)");
  flag(c, "best-config", cal.best_config, "Write the winning config here");
  flag(c, "workers", cal.workers, "Worker threads (0 = hardware concurrency)");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score predictions and compare against baselines");
  flag(e, "pairs", ev.pairs, "Reference/prediction pairs (JSONL)")->required();
  flag(e, "baseline", ev.baseline, "Baseline report(s) (JSON object or array)")->required();
  flag(e, "out", ev.out, "Report (JSON)")->required();
  flag(e, "expected", ev.expected, "Expected reductions to diff against (JSON)");
  flag(e, "name", ev.name, "Name of the evaluated model");
  flag(e, "tolerance", ev.tolerance, "Tolerance for the expected-value diff");
  e->add_flag("--strict-normalization", ev.strict_normalization, "Strip diacritics and fold letters before scoring")
      ->envname(env_name("evaluate", "strict-normalization"));

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Label a synthetic corpus with mock generators");
  flag(s, "spec", sim.spec, "Simulation spec (JSON)")->required();
  flag(s, "config", sim.config, "Pipeline config (JSON)");
  flag(s, "out", sim.out, "Output directory")->required();
  flag(s, "workers", sim.workers, "Worker threads (0 = hardware concurrency)");
  s->add_flag("--quiet", sim.quiet, "No progress lines on stderr")->envname(env_name("simulate", "quiet"));

  TrainArgs tr;
  auto* t = app.add_subcommand("train-lm", "Train the bundled n-gram LM on a text file, one utterance per line");
  flag(t, "corpus", tr.corpus, "Training text")->required();
  flag(t, "out", tr.out, "LM file (JSON)")->required();
  flag(t, "order", tr.order, "n-gram order");
  flag(t, "k", tr.k, "Add-k smoothing constant");
  flag(t, "unit", tr.unit, "word or character");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*l) return run_label(label);
    if (*c) return run_calibrate(cal);
    if (*e) return run_evaluate(ev);
    if (*s) return run_simulate(sim);
    if (*t) return run_train_lm(tr);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
