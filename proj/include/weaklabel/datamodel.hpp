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

// Corpus entities shared by every pipeline stage. Times are integral
// milliseconds so interval sums are exact.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "weaklabel/error.hpp"
#include "weaklabel/textmetrics.hpp"

namespace weaklabel {

using Millis = std::chrono::milliseconds;

inline Millis from_seconds(double seconds) {
  if (!std::isfinite(seconds)) throw ValidationError("non-finite time value");
  return Millis{std::llround(seconds * 1000.0)};
}

inline double to_seconds(Millis t) { return static_cast<double>(t.count()) / 1000.0; }

struct AudioAsset {
  std::string id;
  std::string uri;
  Millis duration{0};
  int sample_rate = 16000;

  friend bool operator==(const AudioAsset&, const AudioAsset&) = default;
};

enum class QualityFlag { too_long, too_short, overlapping_speakers, low_agreement, high_perplexity };

inline std::string_view to_string(QualityFlag f) {
  switch (f) {
    case QualityFlag::too_long: return "too_long";
    case QualityFlag::too_short: return "too_short";
    case QualityFlag::overlapping_speakers: return "overlapping_speakers";
    case QualityFlag::low_agreement: return "low_agreement";
    case QualityFlag::high_perplexity: return "high_perplexity";
  }
  return "?";
}

inline QualityFlag parse_quality_flag(std::string_view s) {
  for (auto f : {QualityFlag::too_long, QualityFlag::too_short, QualityFlag::overlapping_speakers,
                 QualityFlag::low_agreement, QualityFlag::high_perplexity}) {
    if (to_string(f) == s) return f;
  }
  throw ValidationError("unknown quality flag '" + std::string(s) + "'");
}

struct Segment {
  std::string parent_id;
  Millis start{0};
  Millis end{0};
  bool overlap_flag = false;
  std::set<QualityFlag> quality_flags;

  Millis duration() const noexcept { return end - start; }
  bool has(QualityFlag f) const { return quality_flags.contains(f); }

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Hypothesis {
  std::string generator_id;
  std::string text;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

enum class Decision {
  admitted,
  dropped_agreement,
  dropped_perplexity,
  dropped_overlap,
  dropped_length,
  dropped_generator,
};

inline constexpr Decision kAllDecisions[] = {
    Decision::admitted,       Decision::dropped_agreement, Decision::dropped_perplexity,
    Decision::dropped_overlap, Decision::dropped_length,   Decision::dropped_generator,
};

inline std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::admitted: return "admitted";
    case Decision::dropped_agreement: return "dropped_agreement";
    case Decision::dropped_perplexity: return "dropped_perplexity";
    case Decision::dropped_overlap: return "dropped_overlap";
    case Decision::dropped_length: return "dropped_length";
    case Decision::dropped_generator: return "dropped_generator";
  }
  return "?";
}

inline Decision parse_decision(std::string_view s) {
  for (auto d : kAllDecisions) {
    if (to_string(d) == s) return d;
  }
  throw ValidationError("unknown decision '" + std::string(s) + "'");
}

struct SelectionResult {
  Segment segment;
  std::optional<Hypothesis> chosen;
  AgreementStats stats;
  std::optional<double> perplexity;
  Decision decision = Decision::dropped_agreement;
  /// Every generator's output for the segment, in generator order.
  std::vector<Hypothesis> hypotheses;

  friend bool operator==(const SelectionResult&, const SelectionResult&) = default;
};

struct ChunkMember {
  Segment segment;
  std::string transcript;

  friend bool operator==(const ChunkMember&, const ChunkMember&) = default;
};

struct Chunk {
  std::string parent_id;
  Millis start{0};
  Millis end{0};
  std::string transcript;
  std::vector<ChunkMember> members;

  Millis span() const noexcept { return end - start; }

  Millis speech_duration() const noexcept {
    Millis total{0};
    for (const auto& m : members) total += m.segment.duration();
    return total;
  }

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct PipelineConfig {
  Millis max_segment_len{5000};
  Millis max_chunk_len{15000};
  Millis merge_gap_tol{1000};
  Millis min_segment_len{200};
  double pwer_threshold = 0.35;
  double pcer_threshold = 0.15;
  /// Infinity disables the perplexity gate.
  double ppl_threshold = std::numeric_limits<double>::infinity();
  UnitKind ppl_unit = UnitKind::character;
  NormalizationPolicy normalization = NormalizationPolicy::agreement();
  std::vector<std::string> generator_ids;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Empty iff every PipelineConfig invariant holds.
inline std::vector<std::string> validate_config(const PipelineConfig& c) {
  std::vector<std::string> v;
  if (c.max_segment_len <= Millis{0}) v.emplace_back("max_segment_len must be positive");
  if (c.max_segment_len > c.max_chunk_len)
    v.emplace_back("max_segment_len must not exceed max_chunk_len");
  if (c.merge_gap_tol < Millis{0}) v.emplace_back("merge_gap_tol must be non-negative");
  if (c.min_segment_len < Millis{0}) v.emplace_back("min_segment_len must be non-negative");
  if (c.min_segment_len > c.max_segment_len)
    v.emplace_back("min_segment_len must not exceed max_segment_len");
  if (std::isnan(c.pwer_threshold) || c.pwer_threshold < 0)
    v.emplace_back("pwer_threshold must be non-negative");
  if (std::isnan(c.pcer_threshold) || c.pcer_threshold < 0)
    v.emplace_back("pcer_threshold must be non-negative");
  if (std::isnan(c.ppl_threshold) || c.ppl_threshold <= 0)
    v.emplace_back("ppl_threshold must be positive");
  std::set<std::string> seen;
  for (const auto& id : c.generator_ids) {
    if (id.empty()) v.emplace_back("generator id must be non-empty");
    else if (!seen.insert(id).second) v.emplace_back("duplicate generator id '" + id + "'");
  }
  return v;
}

/// Throws ValidationError listing every violation.
inline void require_valid(const PipelineConfig& c) {
  auto v = validate_config(c);
  if (v.empty()) return;
  std::string msg = "invalid pipeline config:";
  for (const auto& s : v) msg += " " + s + ";";
  throw ValidationError(msg);
}

}  // namespace weaklabel
