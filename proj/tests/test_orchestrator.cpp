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

#include "support/oracles.hpp"

using namespace weaklabel;

namespace {

VadEvent speech(std::int64_t s, std::int64_t e) { return {Millis{s}, Millis{e}, VadKind::speech}; }

CorpusEntry entry(const std::string& id, std::int64_t duration_ms, std::vector<VadEvent> vad,
                  std::vector<SpeakerInterval> diar = {}) {
  CorpusEntry e;
  e.audio = AudioAsset{id, "file:///" + id + ".wav", Millis{duration_ms}, 16000};
  e.vad = std::move(vad);
  e.diarization = std::move(diar);
  return e;
}

/// One word every 400 ms across each VAD event, named `prefix` + index.
std::vector<TimedText> words_for(const CorpusEntry& e, const std::string& prefix) {
  std::vector<TimedText> out;
  int n = 0;
  for (const auto& v : std::get<std::vector<VadEvent>>(e.vad)) {
    for (auto t = v.start.count(); t + 400 <= v.end.count(); t += 400)
      out.push_back({e.audio.id, Millis{t}, Millis{t + 400}, prefix + std::to_string(n++)});
  }
  return out;
}

std::shared_ptr<const HypothesisGenerator> replay(const std::string& id, std::vector<TimedText> words) {
  return std::make_shared<FileReplayGenerator>(id, std::make_shared<TimedWords>(std::move(words)));
}

RunOptions quiet(std::size_t workers = 1) {
  RunOptions o;
  o.workers = workers;
  o.log = nullptr;
  return o;
}

PipelineConfig permissive() {
  PipelineConfig c;
  c.pwer_threshold = 1.0;
  c.pcer_threshold = 1.0;
  return c;
}

SimulationSpec sim_spec(double sub_rate, std::uint64_t seed = 7) {
  SimulationSpec s;
  s.utterances = 60;
  s.max_words = 8;
  s.seed = seed;
  for (int g = 0; g < 3; ++g) {
    CorruptionModel m;
    m.sub_rate = sub_rate;
    m.seed = 100 + static_cast<std::uint64_t>(g);
    s.generators.push_back({"mock-" + std::to_string(g), m});
  }
  return s;
}

}  // namespace

TEST(RunPipeline, AgreeingReplaysAdmitAllSpeech) {
  auto e = entry("a1", 20000, {speech(1000, 4200), speech(4200, 6200), speech(8000, 12400), speech(13000, 14200)});
  auto words = words_for(e, "w");
  std::string reference;
  for (const auto& w : words) reference += (reference.empty() ? "" : " ") + w.text;
  auto run = run_pipeline({e}, {replay("g1", words), replay("g2", words)}, nullptr, PipelineConfig{}, quiet());

  const auto& s = run.run.summary;
  EXPECT_EQ(s.count(Decision::admitted), s.segments_created);
  EXPECT_EQ(s.admitted_duration, Millis{3200 + 2000 + 4400 + 1200});
  EXPECT_TRUE(s.conservation_violations().empty());
  std::vector<Segment> admitted;
  for (const auto& sel : run.selections) admitted.push_back(sel.segment);
  EXPECT_DOUBLE_EQ(efficiency(e.audio.duration, admitted), 10800.0 / 20000.0);
  std::string tiled;
  for (const auto& c : run.chunks) tiled += (tiled.empty() ? "" : " ") + c.transcript;
  EXPECT_EQ(tiled, reference);
}

TEST(RunPipeline, DisagreeingGeneratorsAdmitNothing) {
  auto e = entry("a1", 20000, {speech(0, 3000), speech(5000, 9000)});
  PipelineConfig c;
  c.pwer_threshold = 0.1;
  auto run = run_pipeline({e}, {replay("g1", words_for(e, "x")), replay("g2", words_for(e, "y"))}, nullptr, c, quiet());
  EXPECT_TRUE(run.chunks.empty());
  EXPECT_EQ(run.run.summary.count(Decision::dropped_agreement), run.run.summary.segments_created);
  for (const auto& s : run.selections) EXPECT_TRUE(s.segment.has(QualityFlag::low_agreement));
}

TEST(RunPipeline, EmptyCorpus) {
  auto run = run_pipeline({}, {replay("g1", {}), replay("g2", {})}, nullptr, PipelineConfig{}, quiet());
  EXPECT_TRUE(run.chunks.empty());
  EXPECT_EQ(run.run.summary.audios_processed, 0u);
  EXPECT_EQ(run.run.summary.segments_created, 0u);
  EXPECT_TRUE(run.run.summary.conservation_violations().empty());
}

TEST(RunPipeline, RejectsBadSetup) {
  auto g = replay("g1", {});
  PipelineConfig bad;
  bad.max_segment_len = Millis{20000};
  EXPECT_THROW(run_pipeline({}, {g, replay("g2", {})}, nullptr, bad, quiet()), ValidationError);
  EXPECT_THROW(run_pipeline({}, {g}, nullptr, PipelineConfig{}, quiet()), ValidationError);
  PipelineConfig pick;
  pick.generator_ids = {"g1", "nope"};
  EXPECT_THROW(run_pipeline({}, {g, replay("g2", {})}, nullptr, pick, quiet()), ValidationError);
}

TEST(RunPipeline, DecisionsForOverlapShortAndMisses) {
  auto e = entry("a1", 30000, {speech(0, 100), speech(1000, 3000), speech(5000, 7000), speech(9000, 11000)},
                 {{"s1", Millis{5000}, Millis{6500}}, {"s2", Millis{6000}, Millis{7000}}});
  auto words = words_for(e, "w");
  // g2 has no entry for the last region, so that segment is a generator miss.
  auto g2_interval = std::make_shared<IntervalTranscripts>();
  g2_interval->add({"a1", Millis{0}, Millis{100}, ""});
  g2_interval->add({"a1", Millis{1000}, Millis{3000}, "w0 w1 w2 w3 w4"});
  g2_interval->add({"a1", Millis{5000}, Millis{7000}, "anything"});
  auto g2 = std::make_shared<FileReplayGenerator>("g2", g2_interval);
  auto run = run_pipeline({e}, {replay("g1", words), g2}, nullptr, PipelineConfig{}, quiet());
  ASSERT_EQ(run.selections.size(), 4u);
  EXPECT_EQ(run.selections[0].decision, Decision::dropped_length);
  EXPECT_TRUE(run.selections[0].segment.has(QualityFlag::too_short));
  EXPECT_EQ(run.selections[1].decision, Decision::admitted);
  EXPECT_EQ(run.selections[2].decision, Decision::dropped_overlap);
  EXPECT_TRUE(run.selections[2].segment.overlap_flag);
  EXPECT_EQ(run.selections[3].decision, Decision::dropped_generator);
  EXPECT_TRUE(run.run.summary.conservation_violations().empty());
}

TEST(RunPipeline, FailingAudioIsIsolated) {
  oracle::TempDir dir;
  auto good = entry("good", 10000, {speech(0, 2000)});
  auto past_end = entry("past_end", 1000, {speech(0, 2000)});
  auto missing = entry("missing", 10000, {});
  missing.vad = dir / "no_such_vad.jsonl";
  std::vector<std::string> log;
  RunOptions o;
  o.log = [&](const std::string& line) { log.push_back(line); };
  auto words = words_for(good, "w");
  auto run = run_pipeline({good, past_end, missing}, {replay("g1", words), replay("g2", words)}, nullptr,
                          PipelineConfig{}, o);
  EXPECT_EQ(run.run.summary.audios_processed, 1u);
  EXPECT_EQ(run.run.summary.audios_skipped, 2u);
  ASSERT_EQ(run.run.failures.size(), 2u);
  EXPECT_EQ(run.run.failures[0].audio_id, "past_end");
  EXPECT_EQ(run.run.failures[1].audio_id, "missing");
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0].rfind("event=audio_done audio=good", 0), 0u);
  EXPECT_EQ(log[1].rfind("event=audio_skipped audio=past_end", 0), 0u);
}

TEST(RunPipelineProperty, ConservationOnRandomStreams) {
  oracle::TextGen g(71);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CorpusEntry> corpus;
    std::vector<TimedText> words;
    const auto audios = g.between(1, 4);
    for (int a = 0; a < audios; ++a) {
      auto vad = oracle::random_vad(g, 10, 12000);
      std::int64_t end = vad.empty() ? 1000 : vad.back().end.count() + g.between(1, 2000);
      std::vector<SpeakerInterval> diar;
      if (g.uniform() < 0.5 && !vad.empty()) {
        auto t = g.between(0, end - 1);
        diar = {{"s1", Millis{0}, Millis{end}}, {"s2", Millis{t}, Millis{std::min(end, t + 3000)}}};
      }
      auto e = entry("a" + std::to_string(a), end, vad, diar);
      auto w = words_for(e, "w");
      words.insert(words.end(), w.begin(), w.end());
      corpus.push_back(std::move(e));
    }
    auto truth = std::make_shared<TimedWords>(words);
    GeneratorList gens;
    for (int k = 0; k < 3; ++k) {
      CorruptionModel m{g.uniform() * 0.5, g.uniform() * 0.2, g.uniform() * 0.3, UnitKind::word,
                        static_cast<std::uint64_t>(trial * 10 + k), {"p", "q", "r", "s"}};
      gens.push_back(std::make_shared<MockNoisyGenerator>("m" + std::to_string(k), m, truth));
    }
    PipelineConfig c;
    c.max_segment_len = Millis{g.between(500, 6000)};
    c.max_chunk_len = c.max_segment_len + Millis{g.between(0, 10000)};
    c.merge_gap_tol = Millis{g.between(0, 2000)};
    c.pwer_threshold = g.uniform();
    auto run = run_pipeline(corpus, gens, nullptr, c, quiet());
    ASSERT_TRUE(run.run.summary.conservation_violations().empty()) << "trial " << trial;
    for (const auto& s : run.selections) ASSERT_LE(s.segment.duration(), c.max_segment_len);
    for (const auto& ch : run.chunks) ASSERT_LE(ch.span(), c.max_chunk_len);
  }
}

TEST(RunPipeline, WorkerCountDoesNotChangeOutput) {
  auto spec = sim_spec(0.1);
  auto corpus = build_synthetic_corpus(spec);
  auto gens = make_mock_generators(spec, corpus);
  auto a = run_pipeline(corpus.entries, gens, nullptr, PipelineConfig{}, quiet(1));
  auto b = run_pipeline(corpus.entries, gens, nullptr, PipelineConfig{}, quiet(4));
  EXPECT_EQ(a.chunks, b.chunks);
  EXPECT_EQ(a.selections, b.selections);
}

TEST(RunPipeline, PerplexityGateChangesOnlyPerplexityDrops) {
  auto spec = sim_spec(0.05);
  auto corpus = build_synthetic_corpus(spec);
  auto gens = make_mock_generators(spec, corpus);
  std::vector<std::string> train(corpus.utterance_texts.begin(), corpus.utterance_texts.begin() + 30);
  auto lm = train_char_lm(train);
  PipelineConfig gated;
  gated.ppl_threshold = median_scaled_threshold(lm, corpus.utterance_texts, 1.0);
  auto open = run_pipeline(corpus.entries, gens, &lm, PipelineConfig{}, quiet());
  auto closed = run_pipeline(corpus.entries, gens, &lm, gated, quiet());
  ASSERT_EQ(open.selections.size(), closed.selections.size());
  std::size_t newly_dropped = 0;
  for (std::size_t i = 0; i < open.selections.size(); ++i) {
    const auto& a = open.selections[i];
    const auto& b = closed.selections[i];
    ASSERT_EQ(a.stats, b.stats);
    ASSERT_EQ(a.hypotheses, b.hypotheses);
    if (a.decision != b.decision) {
      ASSERT_EQ(a.decision, Decision::admitted);
      ASSERT_EQ(b.decision, Decision::dropped_perplexity);
      ASSERT_TRUE(b.perplexity.has_value());
      ASSERT_GT(*b.perplexity, gated.ppl_threshold);
      ++newly_dropped;
    }
  }
  EXPECT_GT(newly_dropped, 0u);
  EXPECT_EQ(newly_dropped, closed.run.summary.count(Decision::dropped_perplexity));
}

TEST(RunIteration, VersionedDeterministicAndImmutable) {
  oracle::TempDir dir;
  auto spec = sim_spec(0.1);
  auto corpus = build_synthetic_corpus(spec);
  auto gens = make_mock_generators(spec, corpus);
  auto first = run_iteration(dir.path(), corpus.entries, gens, nullptr, PipelineConfig{}, quiet());
  EXPECT_EQ(first.index, 1);
  EXPECT_EQ(first.dir.filename(), "iter-001");
  const auto chunks1 = oracle::read_file(first.dir / kChunksFile);
  const auto selections1 = oracle::read_file(first.dir / kSelectionsFile);
  const auto run1 = oracle::read_file(first.dir / kRunFile);

  auto second = run_iteration(dir.path(), corpus.entries, gens, nullptr, PipelineConfig{}, quiet(3));
  EXPECT_EQ(second.index, 2);
  EXPECT_EQ(oracle::read_file(second.dir / kChunksFile), chunks1);
  EXPECT_EQ(oracle::read_file(second.dir / kSelectionsFile), selections1);

  GeneratorList fewer(gens.begin(), gens.begin() + 2);
  auto third = run_iteration(dir.path(), corpus.entries, fewer, nullptr, PipelineConfig{}, quiet());
  auto record = load_json_file(third.dir / kRunFile);
  EXPECT_EQ(record["generator_ids"], Json({"mock-0", "mock-1"}));
  EXPECT_EQ(record["previous"], "iter-002");
  EXPECT_EQ(record["iteration"], 3);

  EXPECT_EQ(oracle::read_file(first.dir / kChunksFile), chunks1);
  EXPECT_EQ(oracle::read_file(first.dir / kRunFile), run1);
  EXPECT_EQ(latest_iteration(dir.path()), 3);
  EXPECT_EQ(load_manifest(third.dir / kChunksFile).size(), third.run.summary.chunks_emitted);
}

TEST(RunIteration, RefusesExistingDirectory) {
  oracle::TempDir dir;
  std::filesystem::create_directories(dir / "iter-001");
  EXPECT_EQ(latest_iteration(dir.path()), 1);
  std::filesystem::create_directories(dir / "iter-002");
  std::filesystem::remove(dir / "iter-001");
  auto spec = sim_spec(0.0);
  spec.utterances = 5;
  auto corpus = build_synthetic_corpus(spec);
  auto it = run_iteration(dir.path(), corpus.entries, make_mock_generators(spec, corpus), nullptr, PipelineConfig{},
                          quiet());
  EXPECT_EQ(it.dir.filename(), "iter-003");
  EXPECT_EQ(iteration_dir_name(12), "iter-012");
  EXPECT_EQ(iteration_dir_name(1234), "iter-1234");
}

TEST(RunIteration, AgreeingGeneratorNeverLowersAdmittedHours) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto spec = sim_spec(0.15, seed);
    auto corpus = build_synthetic_corpus(spec);
    auto gens = make_mock_generators(spec, corpus);
    oracle::TempDir dir;
    auto before = run_iteration(dir.path(), corpus.entries, gens, nullptr, PipelineConfig{}, quiet());
    GeneratorList more = gens;
    more.push_back(std::make_shared<MockNoisyGenerator>("truthful", CorruptionModel{},
                                                        std::make_shared<TimedWords>(corpus.words)));
    auto after = run_iteration(dir.path(), corpus.entries, more, nullptr, PipelineConfig{}, quiet());
    EXPECT_GE(after.run.summary.admitted_hours(), before.run.summary.admitted_hours()) << "seed " << seed;
    EXPECT_EQ(after.run.summary.generator_ids.size(), 4u);
  }
}

TEST(Simulate, NoCorruptionAdmitsEverythingExactly) {
  auto r = simulate(sim_spec(0.0), PipelineConfig{}, quiet());
  EXPECT_DOUBLE_EQ(r.quality.admitted_fraction, 1.0);
  EXPECT_EQ(r.quality.label_wer, 0.0);
  EXPECT_EQ(r.quality.mean_generator_wer, 0.0);
  EXPECT_TRUE(r.run.run.summary.conservation_violations().empty());
}

TEST(Simulate, DeletingGeneratorDoesNotEmptyTheMedoid) {
  auto spec = sim_spec(0.0);
  spec.generators[2].model.del_rate = 1.0;
  auto r = simulate(spec, permissive(), quiet());
  std::size_t checked = 0;
  for (const auto& s : r.run.selections) {
    if (s.hypotheses.size() != 3 || s.hypotheses[0].text != s.hypotheses[1].text) continue;
    ASSERT_TRUE(s.hypotheses[2].text.empty());
    ASSERT_EQ(s.decision, Decision::admitted);
    ASSERT_TRUE(s.chosen.has_value());
    ASSERT_EQ(s.chosen->text, s.hypotheses[0].text);
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

TEST(Simulate, AdmittedFractionGrowsWithThreshold) {
  double previous = -1;
  for (double t : {0.05, 0.2, 0.5}) {
    PipelineConfig c;
    c.pwer_threshold = t;
    c.pcer_threshold = 1.0;
    auto r = simulate(sim_spec(0.1), c, quiet());
    EXPECT_GE(r.quality.admitted_fraction, previous) << t;
    previous = r.quality.admitted_fraction;
  }
  EXPECT_GT(previous, 0.0);
}

TEST(Simulate, MedoidBeatsTheAverageGenerator) {
  auto spec = sim_spec(0.05);
  spec.utterances = 200;
  auto r = simulate(spec, PipelineConfig{}, quiet());
  ASSERT_GT(r.quality.segments_admitted, 0u);
  EXPECT_LT(r.quality.label_wer, r.quality.mean_generator_wer);
}

TEST(Simulate, RerunIsByteIdentical) {
  oracle::TempDir a, b;
  auto spec = sim_spec(0.1);
  spec.use_lm = true;
  write_simulation(simulate(spec, PipelineConfig{}, quiet(1)), a.path());
  write_simulation(simulate(spec, PipelineConfig{}, quiet(2)), b.path());
  for (const char* f : {"corpus.jsonl", "truth.jsonl", "calibration_samples.jsonl", kChunksFile, kSelectionsFile, "report.json"}) {
    EXPECT_EQ(oracle::read_file(a / f), oracle::read_file(b / f)) << f;
    EXPECT_FALSE(oracle::read_file(a / f).empty()) << f;
  }
  auto report = load_json_file(a / "report.json");
  EXPECT_TRUE(report["quality"]["ppl_threshold"].is_number());
}

TEST(Corpus, ReadsFileWithRelativePaths) {
  oracle::TempDir dir;
  oracle::write_file(dir / "a.vad.jsonl", "{\"start\": 0.0, \"end\": 1.5, \"kind\": \"speech\"}\n");
  oracle::write_file(dir / "corpus.jsonl",
                     "{\"id\": \"a\", \"uri\": \"file:///a.wav\", \"duration\": 2.0, \"vad\": \"a.vad.jsonl\"}\n");
  auto corpus = read_corpus(dir / "corpus.jsonl");
  ASSERT_EQ(corpus.size(), 1u);
  auto job = corpus[0].load();
  ASSERT_EQ(job.vad.size(), 1u);
  EXPECT_EQ(job.vad[0].end, Millis{1500});
  EXPECT_TRUE(job.diarization.empty());
  oracle::write_file(dir / "dup.jsonl", oracle::read_file(dir / "corpus.jsonl") + oracle::read_file(dir / "corpus.jsonl"));
  EXPECT_THROW(read_corpus(dir / "dup.jsonl"), ParseError);
}
