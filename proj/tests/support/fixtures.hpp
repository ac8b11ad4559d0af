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

// Synthetic calibration sets and a brute-force re-statement of the calibration
// objective, shared by the calibration tests and the acceptance binary.

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "support/oracles.hpp"

namespace fixture {

struct CalibrationFixture {
  weaklabel::SyntheticCorpus corpus;
  weaklabel::CalibrationSet set;
};

/// `samples` audios of `per_audio` utterances each, labelled by three mock
/// generators with the given word substitution rate.
inline CalibrationFixture calibration_fixture(std::size_t samples, double sub_rate, std::uint64_t seed,
                                              std::size_t per_audio = 3) {
  using namespace weaklabel;
  SimulationSpec spec;
  spec.utterances = samples * per_audio;
  spec.utterances_per_audio = per_audio;
  spec.vocabulary_size = 60;
  spec.seed = seed;
  spec.overlap_rate = 0.1;
  for (int g = 0; g < 3; ++g) {
    CorruptionModel m;
    m.sub_rate = sub_rate;
    m.seed = seed * 31 + static_cast<std::uint64_t>(g);
    spec.generators.push_back({"mock-" + std::to_string(g), m});
  }
  CalibrationFixture f;
  f.corpus = build_synthetic_corpus(spec);
  f.set.generators = make_mock_generators(spec, f.corpus);
  for (const auto& e : f.corpus.entries) f.set.samples.push_back({e, f.corpus.references.at(e.audio.id)});
  return f;
}

/// Objective of one config, composed directly from the stage definitions:
/// drop too-short and overlapping segments, drop on mean pairwise WER or CER
/// strictly above threshold, keep the brute-force medoid unless its perplexity
/// is strictly above the LM threshold, score efficiency as
/// admitted time over audio time and error as concatenation WER.
inline double brute_force_objective(const weaklabel::PipelineConfig& c, const weaklabel::CalibrationSet& set) {
  using namespace weaklabel;
  auto tokens = [&](const std::string& t, UnitKind k) { return normalize(t, c.normalization, k).units; };
  auto mean_pairwise = [&](const std::vector<std::vector<std::string>>& seqs) {
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      if (seqs[i].empty()) continue;
      for (std::size_t j = 0; j < seqs.size(); ++j) {
        if (i == j) continue;
        sum += static_cast<double>(oracle::levenshtein(seqs[i], seqs[j])) / static_cast<double>(seqs[i].size());
        ++pairs;
      }
    }
    return pairs ? sum / static_cast<double>(pairs) : std::numeric_limits<double>::infinity();
  };

  double total = 0;
  for (const auto& sample : set.samples) {
    AudioJob job = sample.entry.load();
    auto segs = flag_overlap(split_by_vad(job.audio.id, job.vad, c.max_segment_len, c.min_segment_len), job.diarization);
    std::int64_t admitted_ms = 0;
    std::string joined;
    for (const auto& s : segs) {
      if (s.duration() < c.min_segment_len || s.overlap_flag) continue;
      std::vector<Hypothesis> hyps;
      std::vector<std::vector<std::string>> w, ch;
      for (const auto& g : set.generators) {
        hyps.push_back(g->generate(s));
        w.push_back(tokens(hyps.back().text, UnitKind::word));
        ch.push_back(tokens(hyps.back().text, UnitKind::character));
      }
      if (mean_pairwise(w) > c.pwer_threshold || mean_pairwise(ch) > c.pcer_threshold) continue;
      std::size_t best = 0;
      std::vector<std::size_t> ws(hyps.size(), 0), cs(hyps.size(), 0);
      for (std::size_t i = 0; i < hyps.size(); ++i) {
        for (std::size_t j = 0; j < hyps.size(); ++j) {
          ws[i] += oracle::levenshtein(w[i], w[j]);
          cs[i] += oracle::levenshtein(ch[i], ch[j]);
        }
      }
      for (std::size_t i = 1; i < hyps.size(); ++i) {
        if (std::tie(ws[i], cs[i], hyps[i].generator_id) < std::tie(ws[best], cs[best], hyps[best].generator_id)) best = i;
      }
      if (w[best].empty()) continue;
      if (set.lm && !std::isinf(c.ppl_threshold) && set.lm->perplexity(hyps[best].text) > c.ppl_threshold) continue;
      admitted_ms += s.duration().count();
      joined += (joined.empty() ? "" : " ") + hyps[best].text;
    }
    if (admitted_ms == 0) continue;
    const double xi = static_cast<double>(admitted_ms) / static_cast<double>(job.audio.duration.count());
    auto ref = tokens(sample.reference_text, UnitKind::word);
    const double err = static_cast<double>(oracle::levenshtein(ref, tokens(joined, UnitKind::word))) /
                       static_cast<double>(ref.size());
    total += xi - err;
  }
  return total;
}

}  // namespace fixture
