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

// JSON encoding of the data model. Field order is fixed by ordered_json so
// manifests are byte-stable across runs.

#include <cmath>
#include <limits>
#include <string>

#include "json.hpp"
#include "weaklabel/datamodel.hpp"

namespace weaklabel {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing field '") + key + "'");
  return *it;
}

inline double number_or_inf(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity"))
    return std::numeric_limits<double>::infinity();
  if (!j.is_number()) throw ValidationError("expected a number, null or \"inf\"");
  return j.get<double>();
}

inline Json inf_as_null(double v) { return std::isinf(v) ? Json(nullptr) : Json(v); }

}  // namespace detail

inline Json seconds_json(Millis t) { return to_seconds(t); }

inline Millis seconds_from_json(const Json& j) {
  if (!j.is_number()) throw ValidationError("time must be a number of seconds");
  return from_seconds(j.get<double>());
}

inline Json to_json(const AudioAsset& a) {
  return Json{{"id", a.id},
              {"uri", a.uri},
              {"duration", seconds_json(a.duration)},
              {"sample_rate", a.sample_rate}};
}

inline AudioAsset audio_asset_from_json(const Json& j) {
  AudioAsset a;
  a.id = detail::require(j, "id").get<std::string>();
  a.uri = j.value("uri", std::string{});
  a.duration = seconds_from_json(detail::require(j, "duration"));
  a.sample_rate = j.value("sample_rate", 16000);
  if (a.id.empty()) throw ValidationError("audio id must be non-empty");
  if (a.duration <= Millis{0}) throw ValidationError("audio '" + a.id + "' has non-positive duration");
  if (a.sample_rate <= 0) throw ValidationError("audio '" + a.id + "' has non-positive sample_rate");
  return a;
}

inline Json to_json(const Segment& s) {
  Json flags = Json::array();
  for (auto f : s.quality_flags) flags.push_back(std::string(to_string(f)));
  return Json{{"parent_id", s.parent_id},
              {"start", seconds_json(s.start)},
              {"end", seconds_json(s.end)},
              {"overlap_flag", s.overlap_flag},
              {"quality_flags", std::move(flags)}};
}

inline Segment segment_from_json(const Json& j) {
  Segment s;
  s.parent_id = detail::require(j, "parent_id").get<std::string>();
  s.start = seconds_from_json(detail::require(j, "start"));
  s.end = seconds_from_json(detail::require(j, "end"));
  s.overlap_flag = j.value("overlap_flag", false);
  if (auto it = j.find("quality_flags"); it != j.end()) {
    for (const auto& f : *it) s.quality_flags.insert(parse_quality_flag(f.get<std::string>()));
  }
  if (s.start < Millis{0}) throw ValidationError("segment start is negative");
  if (s.start >= s.end) throw ValidationError("segment start must be before end");
  return s;
}

inline Json to_json(const Hypothesis& h) {
  return Json{{"generator_id", h.generator_id}, {"text", h.text}};
}

inline Hypothesis hypothesis_from_json(const Json& j) {
  return {detail::require(j, "generator_id").get<std::string>(),
          detail::require(j, "text").get<std::string>()};
}

inline Json to_json(const Ratio& r) { return Json::array({r.num(), r.den()}); }

inline Ratio ratio_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("ratio must be [numerator, denominator]");
  return Ratio(j[0].get<std::int64_t>(), j[1].get<std::int64_t>());
}

inline Json to_json(const AgreementStats& s) {
  return Json{{"pwer", s.avg_pairwise_wer.value()},
              {"pcer", s.avg_pairwise_cer.value()},
              {"pairs", s.pair_count},
              {"pwer_ratio", to_json(s.avg_pairwise_wer)},
              {"pcer_ratio", to_json(s.avg_pairwise_cer)}};
}

inline AgreementStats agreement_stats_from_json(const Json& j) {
  AgreementStats s;
  s.avg_pairwise_wer = ratio_from_json(detail::require(j, "pwer_ratio"));
  s.avg_pairwise_cer = ratio_from_json(detail::require(j, "pcer_ratio"));
  s.pair_count = detail::require(j, "pairs").get<std::size_t>();
  return s;
}

inline Json to_json(const SelectionResult& r) {
  Json hyps = Json::array();
  for (const auto& h : r.hypotheses) hyps.push_back(to_json(h));
  return Json{{"segment", to_json(r.segment)},
              {"chosen", r.chosen ? to_json(*r.chosen) : Json(nullptr)},
              {"stats", to_json(r.stats)},
              {"ppl", r.perplexity ? Json(*r.perplexity) : Json(nullptr)},
              {"decision", std::string(to_string(r.decision))},
              {"hypotheses", std::move(hyps)}};
}

inline SelectionResult selection_from_json(const Json& j) {
  SelectionResult r;
  r.segment = segment_from_json(detail::require(j, "segment"));
  if (const auto& c = detail::require(j, "chosen"); !c.is_null()) r.chosen = hypothesis_from_json(c);
  r.stats = agreement_stats_from_json(detail::require(j, "stats"));
  if (auto it = j.find("ppl"); it != j.end() && !it->is_null()) r.perplexity = it->get<double>();
  r.decision = parse_decision(detail::require(j, "decision").get<std::string>());
  if (auto it = j.find("hypotheses"); it != j.end()) {
    for (const auto& h : *it) r.hypotheses.push_back(hypothesis_from_json(h));
  }
  if (r.chosen.has_value() != (r.decision == Decision::admitted))
    throw ValidationError("chosen hypothesis must be present iff the decision is admitted");
  if (r.perplexity && !(*r.perplexity > 0)) throw ValidationError("perplexity must be positive");
  return r;
}

/// Checks the chunk invariants that do not depend on a config.
inline void validate_chunk(const Chunk& c) {
  if (c.members.empty()) throw ValidationError("chunk has no member segments");
  if (c.start >= c.end) throw ValidationError("chunk start must be before end");
  if (c.members.front().segment.start != c.start || c.members.back().segment.end != c.end)
    throw ValidationError("chunk span must run from first member start to last member end");
  std::string joined;
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    const auto& s = c.members[i].segment;
    if (s.parent_id != c.parent_id) throw ValidationError("chunk member from a different parent");
    if (i > 0 && c.members[i - 1].segment.end > s.start)
      throw ValidationError("chunk members overlap or are out of time order");
    if (i > 0) joined.push_back(' ');
    joined += c.members[i].transcript;
  }
  if (joined != c.transcript)
    throw ValidationError("chunk transcript differs from the joined member transcripts");
}

inline Json to_json(const Chunk& c) {
  Json members = Json::array();
  for (const auto& m : c.members) {
    Json s = to_json(m.segment);
    s["transcript"] = m.transcript;
    members.push_back(std::move(s));
  }
  return Json{{"parent_id", c.parent_id},
              {"start", seconds_json(c.start)},
              {"end", seconds_json(c.end)},
              {"transcript", c.transcript},
              {"segments", std::move(members)}};
}

inline Chunk chunk_from_json(const Json& j) {
  Chunk c;
  c.parent_id = detail::require(j, "parent_id").get<std::string>();
  c.start = seconds_from_json(detail::require(j, "start"));
  c.end = seconds_from_json(detail::require(j, "end"));
  c.transcript = detail::require(j, "transcript").get<std::string>();
  for (const auto& m : detail::require(j, "segments")) {
    c.members.push_back({segment_from_json(m), detail::require(m, "transcript").get<std::string>()});
  }
  validate_chunk(c);
  return c;
}

inline Json to_json(const NormalizationPolicy& p) {
  return Json{{"strip_diacritics", p.strip_diacritics},
              {"fold_characters", p.fold_characters},
              {"collapse_whitespace", p.collapse_whitespace},
              {"remove_punctuation", p.remove_punctuation}};
}

inline NormalizationPolicy normalization_from_json(const Json& j, NormalizationPolicy p = {}) {
  for (const auto& [key, value] : j.items()) {
    if (key == "strip_diacritics") p.strip_diacritics = value.get<bool>();
    else if (key == "fold_characters") p.fold_characters = value.get<bool>();
    else if (key == "collapse_whitespace") p.collapse_whitespace = value.get<bool>();
    else if (key == "remove_punctuation") p.remove_punctuation = value.get<bool>();
    else throw ValidationError("unknown normalization field '" + key + "'");
  }
  return p;
}

inline Json to_json(const PipelineConfig& c) {
  return Json{{"max_segment_len", seconds_json(c.max_segment_len)},
              {"max_chunk_len", seconds_json(c.max_chunk_len)},
              {"merge_gap_tol", seconds_json(c.merge_gap_tol)},
              {"min_segment_len", seconds_json(c.min_segment_len)},
              {"pwer_threshold", c.pwer_threshold},
              {"pcer_threshold", c.pcer_threshold},
              {"ppl_threshold", detail::inf_as_null(c.ppl_threshold)},
              {"ppl_unit", std::string(to_string(c.ppl_unit))},
              {"normalization", to_json(c.normalization)},
              {"generator_ids", c.generator_ids}};
}

/// Reads a (possibly partial) config over `base`. Unknown keys are rejected.
inline PipelineConfig config_from_json(const Json& j, PipelineConfig c = {}) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "max_segment_len") c.max_segment_len = seconds_from_json(value);
    else if (key == "max_chunk_len") c.max_chunk_len = seconds_from_json(value);
    else if (key == "merge_gap_tol") c.merge_gap_tol = seconds_from_json(value);
    else if (key == "min_segment_len") c.min_segment_len = seconds_from_json(value);
    else if (key == "pwer_threshold") c.pwer_threshold = detail::number_or_inf(value);
    else if (key == "pcer_threshold") c.pcer_threshold = detail::number_or_inf(value);
    else if (key == "ppl_threshold") c.ppl_threshold = detail::number_or_inf(value);
    else if (key == "ppl_unit") c.ppl_unit = parse_unit_kind(value.get<std::string>());
    else if (key == "normalization") c.normalization = normalization_from_json(value, c.normalization);
    else if (key == "generator_ids") c.generator_ids = value.get<std::vector<std::string>>();
    else throw ValidationError("unknown config field '" + key + "'");
  }
  return c;
}

}  // namespace weaklabel
