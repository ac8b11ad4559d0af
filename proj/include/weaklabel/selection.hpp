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

// Hypothesis selection: medoid choice, the agreement gate and the perplexity gate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "weaklabel/datamodel.hpp"
#include "weaklabel/language_model.hpp"
#include "weaklabel/textmetrics.hpp"

namespace weaklabel {

using HypothesisSet = std::vector<Hypothesis>;

struct MedoidScores {
  /// Summed distance to every other hypothesis in the primary unit.
  std::vector<std::size_t> primary;
  /// Same in the other unit kind; first tie-breaker.
  std::vector<std::size_t> secondary;
};

inline MedoidScores medoid_scores(const HypothesisSet& hyps, UnitKind unit_kind,
                                  const NormalizationPolicy& policy) {
  const UnitKind other = unit_kind == UnitKind::word ? UnitKind::character : UnitKind::word;
  std::vector<TokenSequence> a, b;
  for (const auto& h : hyps) {
    a.push_back(normalize(h.text, policy, unit_kind));
    b.push_back(normalize(h.text, policy, other));
  }
  MedoidScores s{std::vector<std::size_t>(hyps.size(), 0), std::vector<std::size_t>(hyps.size(), 0)};
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    for (std::size_t j = i + 1; j < hyps.size(); ++j) {
      std::size_t d = levenshtein(a[i], a[j]);
      std::size_t e = levenshtein(b[i], b[j]);
      s.primary[i] += d, s.primary[j] += d;
      s.secondary[i] += e, s.secondary[j] += e;
    }
  }
  return s;
}

/// Index of the hypothesis minimizing summed Levenshtein distance to the others.
/// Ties go to the lower summed distance in the other unit kind, then to the
/// lexicographically smallest generator_id.
inline std::size_t select_hypothesis_index(const HypothesisSet& hyps, UnitKind unit_kind = UnitKind::word,
                                           const NormalizationPolicy& policy = NormalizationPolicy::agreement()) {
  if (hyps.size() < 2) throw UsageError("hypothesis selection needs at least two hypotheses");
  auto s = medoid_scores(hyps, unit_kind, policy);
  std::size_t best = 0;
  for (std::size_t i = 1; i < hyps.size(); ++i) {
    auto key = [&](std::size_t k) { return std::tie(s.primary[k], s.secondary[k], hyps[k].generator_id); };
    if (key(i) < key(best)) best = i;
  }
  return best;
}

inline Hypothesis select_hypothesis(const HypothesisSet& hyps, UnitKind unit_kind = UnitKind::word,
                                    const NormalizationPolicy& policy = NormalizationPolicy::agreement()) {
  return hyps[select_hypothesis_index(hyps, unit_kind, policy)];
}

struct AgreementVerdict {
  AgreementStats stats;
  Decision decision = Decision::admitted;
};

/// Drops when either average pairwise rate strictly exceeds its threshold, or when
/// every hypothesis is empty (no pair yields evidence of agreement).
inline AgreementVerdict admit_by_agreement(const HypothesisSet& hyps, const PipelineConfig& config) {
  std::vector<std::string> texts;
  texts.reserve(hyps.size());
  for (const auto& h : hyps) texts.push_back(h.text);
  AgreementVerdict v{agreement_stats(texts, config.normalization), Decision::admitted};
  if (v.stats.pair_count == 0 || v.stats.avg_pairwise_wer.exceeds(config.pwer_threshold) ||
      v.stats.avg_pairwise_cer.exceeds(config.pcer_threshold))
    v.decision = Decision::dropped_agreement;
  return v;
}

struct PerplexityVerdict {
  std::optional<double> perplexity;
  Decision decision = Decision::admitted;
};

/// Drops iff PPL strictly exceeds the threshold. An infinite threshold or a null
/// LM disables the gate without scoring.
inline PerplexityVerdict admit_by_perplexity(const Hypothesis& h, const LanguageModel* lm, double threshold) {
  if (!lm || std::isinf(threshold)) return {std::nullopt, Decision::admitted};
  double ppl = 0;
  try {
    ppl = lm->perplexity(h.text);
  } catch (const UndefinedRateError&) {
    // Nothing left to score after the LM's own normalization.
    return {std::nullopt, Decision::dropped_perplexity};
  }
  return {ppl, ppl > threshold ? Decision::dropped_perplexity : Decision::admitted};
}

inline PerplexityVerdict admit_by_perplexity(const Hypothesis& h, const LanguageModel& lm, double threshold) {
  return admit_by_perplexity(h, &lm, threshold);
}

/// `factor` times the median perplexity of `texts`; texts that normalize to
/// nothing are skipped.
inline double median_scaled_threshold(const LanguageModel& lm, const std::vector<std::string>& texts,
                                      double factor = 3.0) {
  std::vector<double> ppl;
  for (const auto& t : texts) {
    try {
      ppl.push_back(lm.perplexity(t));
    } catch (const UndefinedRateError&) {
    }
  }
  if (ppl.empty()) throw UsageError("no scorable text for the perplexity threshold");
  std::sort(ppl.begin(), ppl.end());
  const std::size_t n = ppl.size();
  double median = n % 2 ? ppl[n / 2] : 0.5 * (ppl[n / 2 - 1] + ppl[n / 2]);
  return factor * median;
}

}  // namespace weaklabel
