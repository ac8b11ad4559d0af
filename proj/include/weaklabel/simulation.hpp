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


#pragma once

// Synthetic corpora with known ground truth, labeled end to end by mock
// generators. Everything here is a pure function of the SimulationSpec and its seeds.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "weaklabel/calibration.hpp"
#include "weaklabel/generators.hpp"
#include "weaklabel/language_model.hpp"
#include "weaklabel/pipeline.hpp"

namespace weaklabel {

struct MockGeneratorSpec {
  std::string generator_id;
  /// Empty alphabet means the synthetic vocabulary.
  CorruptionModel model;
};

struct SimulationSpec {
  std::size_t utterances = 200;
  std::size_t utterances_per_audio = 10;
  std::size_t min_words = 3;
  std::size_t max_words = 12;
  std::size_t vocabulary_size = 300;
  Millis min_word_len{250};
  Millis max_word_len{550};
  Millis min_pause{300};
  Millis max_pause{2000};
  /// Chance that a word boundary inside an utterance is also a VAD event boundary.
  double touch_probability = 0.3;
  /// Chance that an utterance carries a second, overlapping speaker.
  double overlap_rate = 0.0;
  std::uint64_t seed = 7;
  std::vector<MockGeneratorSpec> generators;
  /// Trains a character LM on the ground truth and enables the gate at
  /// `lm_threshold_factor` times the median ground-truth perplexity.
  bool use_lm = false;
  double lm_threshold_factor = 3.0;
};

inline SimulationSpec simulation_spec_from_json(const Json& j) {
  SimulationSpec s;
  s.utterances = j.value("utterances", s.utterances);
  s.utterances_per_audio = j.value("utterances_per_audio", s.utterances_per_audio);
  s.min_words = j.value("min_words", s.min_words);
  s.max_words = j.value("max_words", s.max_words);
  s.vocabulary_size = j.value("vocabulary_size", s.vocabulary_size);
  if (j.contains("min_word_len")) s.min_word_len = seconds_from_json(j["min_word_len"]);
  if (j.contains("max_word_len")) s.max_word_len = seconds_from_json(j["max_word_len"]);
  if (j.contains("min_pause")) s.min_pause = seconds_from_json(j["min_pause"]);
  if (j.contains("max_pause")) s.max_pause = seconds_from_json(j["max_pause"]);
  s.touch_probability = j.value("touch_probability", s.touch_probability);
  s.overlap_rate = j.value("overlap_rate", s.overlap_rate);
  s.seed = j.value("seed", s.seed);
  s.use_lm = j.value("use_lm", s.use_lm);
  s.lm_threshold_factor = j.value("lm_threshold_factor", s.lm_threshold_factor);
  for (const auto& g : detail::require(j, "generators")) {
    MockGeneratorSpec m;
    m.generator_id = detail::require(g, "generator_id").get<std::string>();
    m.model.sub_rate = g.value("sub_rate", 0.0);
    m.model.ins_rate = g.value("ins_rate", 0.0);
    m.model.del_rate = g.value("del_rate", 0.0);
    m.model.seed = g.value("seed", std::uint64_t{0});
    m.model.unit_kind = parse_unit_kind(g.value("unit_kind", std::string("word")));
    if (g.contains("alphabet")) m.model.alphabet = g["alphabet"].get<std::vector<std::string>>();
    s.generators.push_back(std::move(m));
  }
  return s;
}

inline void validate(const SimulationSpec& s) {
  if (s.utterances_per_audio == 0) throw ValidationError("utterances_per_audio must be positive");
  if (s.min_words == 0 || s.min_words > s.max_words) throw ValidationError("need 1 <= min_words <= max_words");
  if (s.vocabulary_size < 2) throw ValidationError("vocabulary_size must be at least 2");
  if (s.min_word_len <= Millis{0} || s.min_word_len > s.max_word_len)
    throw ValidationError("need 0 < min_word_len <= max_word_len");
  if (s.min_pause <= Millis{0} || s.min_pause > s.max_pause) throw ValidationError("need 0 < min_pause <= max_pause");
  for (double p : {s.touch_probability, s.overlap_rate}) {
    if (!(p >= 0 && p <= 1)) throw ValidationError("probabilities must lie in [0, 1]");
  }
  if (s.generators.size() < 2) throw ValidationError("simulation needs at least two generators");
  std::set<std::string> ids;
  for (const auto& g : s.generators) {
    if (g.generator_id.empty() || !ids.insert(g.generator_id).second)
      throw ValidationError("generator ids must be unique and non-empty");
  }
}

struct SyntheticCorpus {
  std::vector<CorpusEntry> entries;
  /// One entry per word, the ground truth.
  std::vector<TimedText> words;
  /// Full transcript per audio id.
  std::map<std::string, std::string> references;
  std::vector<std::string> vocabulary;
  std::vector<std::string> utterance_texts;
};

/// Deterministic pseudo-words over the Arabic letter alphabet, all distinct.
inline std::vector<std::string> synthetic_vocabulary(std::size_t size, std::uint64_t seed) {
  const auto& letters = default_char_alphabet();
  Rng rng(splitmix64(seed ^ 0x766f636162ULL));
  std::vector<std::string> out;
  std::set<std::string> seen;
  while (out.size() < size) {
    std::string w;
    auto len = rng.between(2, 6);
    for (std::int64_t i = 0; i < len; ++i) w += letters[rng.index(letters.size())];
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

inline SyntheticCorpus build_synthetic_corpus(const SimulationSpec& spec) {
  validate(spec);
  SyntheticCorpus c;
  c.vocabulary = synthetic_vocabulary(spec.vocabulary_size, spec.seed);
  Rng rng(splitmix64(spec.seed));
  const std::size_t audios = (spec.utterances + spec.utterances_per_audio - 1) / spec.utterances_per_audio;
  std::size_t made = 0;
  for (std::size_t a = 0; a < audios; ++a) {
    std::string id = "sim-" + std::string(a < 10 ? "000" : a < 100 ? "00" : a < 1000 ? "0" : "") + std::to_string(a);
    std::vector<VadEvent> vad;
    std::vector<SpeakerInterval> diar;
    std::string reference;
    Millis t{rng.between(spec.min_pause.count(), spec.max_pause.count())};
    for (std::size_t u = 0; u < spec.utterances_per_audio && made < spec.utterances; ++u, ++made) {
      const auto n = static_cast<std::size_t>(
          rng.between(static_cast<std::int64_t>(spec.min_words), static_cast<std::int64_t>(spec.max_words)));
      const Millis utt_start = t;
      Millis event_start = t;
      std::string text;
      for (std::size_t w = 0; w < n; ++w) {
        const auto& word = c.vocabulary[rng.index(c.vocabulary.size())];
        Millis len{rng.between(spec.min_word_len.count(), spec.max_word_len.count())};
        c.words.push_back({id, t, t + len, word});
        t += len;
        if (!text.empty()) text.push_back(' ');
        text += word;
        if (w + 1 < n && rng.bernoulli(spec.touch_probability)) {
          vad.push_back({event_start, t, VadKind::speech});
          event_start = t;
        }
      }
      vad.push_back({event_start, t, VadKind::speech});
      diar.push_back({"spk-a", utt_start, t});
      if (rng.bernoulli(spec.overlap_rate)) {
        Millis span = t - utt_start;
        Millis s = utt_start + Millis{rng.between(0, span.count() / 2)};
        diar.push_back({"spk-b", s, s + std::max(Millis{1}, span / 4)});
      }
      if (!reference.empty()) reference.push_back(' ');
      reference += text;
      c.utterance_texts.push_back(std::move(text));
      t += Millis{rng.between(spec.min_pause.count(), spec.max_pause.count())};
    }
    std::sort(diar.begin(), diar.end(), [](const auto& x, const auto& y) { return x.start < y.start; });
    CorpusEntry e;
    e.audio = AudioAsset{id, "synthetic://" + id, t, 16000};
    e.vad = std::move(vad);
    e.diarization = std::move(diar);
    c.entries.push_back(std::move(e));
    c.references.emplace(id, std::move(reference));
  }
  return c;
}

inline GeneratorList make_mock_generators(const SimulationSpec& spec, const SyntheticCorpus& corpus) {
  auto truth = std::make_shared<TimedWords>(corpus.words);
  GeneratorList out;
  for (const auto& g : spec.generators) {
    CorruptionModel m = g.model;
    if (m.alphabet.empty() && m.unit_kind == UnitKind::word) m.alphabet = corpus.vocabulary;
    out.push_back(std::make_shared<MockNoisyGenerator>(g.generator_id, m, truth));
  }
  return out;
}

struct QualityReport {
  std::size_t segments_admitted = 0;
  Millis speech{0};
  Millis admitted{0};
  /// Admitted speech over total speech.
  double admitted_fraction = 0;
  /// Corpus-pooled WER of the chosen labels against ground truth.
  double label_wer = 0;
  /// Each generator's pooled WER on the same admitted segments.
  std::map<std::string, double> generator_wer;
  double mean_generator_wer = 0;
  std::optional<double> ppl_threshold;
};

inline Json to_json(const QualityReport& q) {
  Json per = Json::object();
  for (const auto& [id, w] : q.generator_wer) per[id] = w;
  return Json{{"segments_admitted", q.segments_admitted},
              {"speech_seconds", seconds_json(q.speech)},
              {"admitted_seconds", seconds_json(q.admitted)},
              {"admitted_fraction", q.admitted_fraction},
              {"label_wer", q.label_wer},
              {"generator_wer", std::move(per)},
              {"mean_generator_wer", q.mean_generator_wer},
              {"ppl_threshold", q.ppl_threshold ? Json(*q.ppl_threshold) : Json(nullptr)}};
}

/// Scores admitted selections against ground truth.
inline QualityReport assess_quality(const std::vector<SelectionResult>& selections, const TranscriptSource& truth,
                                    const NormalizationPolicy& policy, Millis speech) {
  QualityReport q;
  q.speech = speech;
  std::size_t ref_len = 0, label_err = 0;
  std::map<std::string, std::size_t> gen_err;
  for (const auto& s : selections) {
    if (s.decision != Decision::admitted) continue;
    ++q.segments_admitted;
    q.admitted += s.segment.duration();
    auto ref = normalize(truth.lookup(s.segment).value_or(""), policy, UnitKind::word);
    ref_len += ref.size();
    label_err += levenshtein(ref, normalize(s.chosen->text, policy, UnitKind::word));
    for (const auto& h : s.hypotheses) gen_err[h.generator_id] += levenshtein(ref, normalize(h.text, policy, UnitKind::word));
  }
  q.admitted_fraction = speech.count() > 0 ? static_cast<double>(q.admitted.count()) / static_cast<double>(speech.count()) : 0.0;
  if (ref_len > 0) {
    q.label_wer = static_cast<double>(label_err) / static_cast<double>(ref_len);
    double sum = 0;
    for (const auto& [id, e] : gen_err) {
      q.generator_wer[id] = static_cast<double>(e) / static_cast<double>(ref_len);
      sum += q.generator_wer[id];
    }
    q.mean_generator_wer = gen_err.empty() ? 0.0 : sum / static_cast<double>(gen_err.size());
  }
  return q;
}

struct SimulationResult {
  SyntheticCorpus corpus;
  CollectedRun run;
  QualityReport quality;
  PipelineConfig config;
};

inline SimulationResult simulate(const SimulationSpec& spec, const PipelineConfig& config,
                                 const RunOptions& options = {}) {
  SimulationResult r;
  r.corpus = build_synthetic_corpus(spec);
  r.config = config;
  auto generators = make_mock_generators(spec, r.corpus);
  std::unique_ptr<NgramLM> lm;
  if (spec.use_lm) {
    lm = std::make_unique<NgramLM>(train_ngram_lm(r.corpus.utterance_texts, 3, 1.0, config.ppl_unit,
                                                  config.normalization));
    r.config.ppl_threshold = median_scaled_threshold(*lm, r.corpus.utterance_texts, spec.lm_threshold_factor);
  }
  r.run = run_pipeline(r.corpus.entries, generators, lm.get(), r.config, options);
  TimedWords truth(r.corpus.words);
  r.quality = assess_quality(r.run.selections, truth, r.config.normalization, r.run.run.summary.speech_duration);
  if (spec.use_lm) r.quality.ppl_threshold = r.config.ppl_threshold;
  return r;
}

/// Writes corpus, ground truth, calibration samples, manifests and a timing-free
/// report into `dir`.
inline void write_simulation(const SimulationResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    ManifestWriter corpus(dir / "corpus.jsonl");
    for (const auto& e : r.corpus.entries) corpus.write_json(to_json(e));
    corpus.flush();
    ManifestWriter truth(dir / "truth.jsonl");
    for (const auto& w : r.corpus.words) truth.write_json(to_json(w));
    truth.flush();
    ManifestWriter samples(dir / "calibration_samples.jsonl");
    for (const auto& e : r.corpus.entries) samples.write_json(to_json(CalibrationSample{e, r.corpus.references.at(e.audio.id)}));
    samples.flush();
  }
  write_manifest(r.run.chunks, dir / kChunksFile);
  write_manifest(r.run.selections, dir / kSelectionsFile);
  save_json_file(Json{{"config", to_json(r.config)},
                      {"summary", to_json(r.run.run.summary, false)},
                      {"quality", to_json(r.quality)}},
                 dir / "report.json");
}

}  // namespace weaklabel
