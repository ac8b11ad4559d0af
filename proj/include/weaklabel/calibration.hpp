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

// Hyperparameter search over the pipeline. Each candidate config is scored as
// the sum over calibration samples of (efficiency - weight * error).

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weaklabel/pipeline.hpp"

namespace weaklabel {

// ---------------------------------------------------------------------------
// Efficiency, error, objective
// ---------------------------------------------------------------------------

/// Summed segment duration over `denominator`. Segments must be well-formed,
/// pairwise disjoint and inside [0, audio_duration].
inline double efficiency(Millis audio_duration, const std::vector<Segment>& segments,
                         std::optional<Millis> denominator = std::nullopt) {
  if (audio_duration <= Millis{0}) throw ValidationError("audio duration must be positive");
  const Millis denom = denominator.value_or(audio_duration);
  if (denom <= Millis{0}) throw ValidationError("efficiency denominator must be positive");
  std::vector<const Segment*> sorted;
  for (const auto& s : segments) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const Segment* a, const Segment* b) { return a->start < b->start; });
  Millis total{0};
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = *sorted[i];
    if (s.start < Millis{0} || s.start >= s.end || s.end > audio_duration)
      throw ValidationError("segment outside the audio or with start >= end");
    if (i > 0 && sorted[i - 1]->end > s.start) throw ValidationError("overlapping segments");
    total += s.duration();
  }
  return static_cast<double>(total.count()) / static_cast<double>(denom.count());
}

inline double efficiency(double audio_seconds, const std::vector<Segment>& segments) {
  return efficiency(from_seconds(audio_seconds), segments);
}

struct SelectedLabel {
  Segment segment;
  Hypothesis hypothesis;
};

struct PipelineError {
  double value = 0;
  /// WER of the concatenated labels against the whole reference.
  bool concatenation_fallback = false;
  /// False when nothing was selected.
  bool defined = true;
};

/// Mean per-segment WER when `segment_references` knows the segments (segments
/// whose reference is empty are skipped), else WER of the time-ordered
/// concatenation against `reference_text`.
inline PipelineError pipeline_error(std::string_view reference_text, std::vector<SelectedLabel> selected,
                                    const NormalizationPolicy& policy,
                                    const TranscriptSource* segment_references = nullptr) {
  if (selected.empty()) return {0.0, false, false};
  std::sort(selected.begin(), selected.end(),
            [](const SelectedLabel& a, const SelectedLabel& b) { return a.segment.start < b.segment.start; });
  if (segment_references) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& s : selected) {
      auto ref = segment_references->lookup(s.segment);
      if (!ref) continue;
      auto r = normalize(*ref, policy, UnitKind::word);
      if (r.empty()) continue;
      sum += error_rate(r, normalize(s.hypothesis.text, policy, UnitKind::word)).value();
      ++n;
    }
    if (n > 0) return {sum / static_cast<double>(n), false, true};
  }
  std::string joined;
  for (const auto& s : selected) {
    if (!joined.empty()) joined.push_back(' ');
    joined += s.hypothesis.text;
  }
  return {error_rate(reference_text, joined, UnitKind::word, policy).value(), true, true};
}

struct SampleScore {
  double xi = 0;
  double error = 0;
};

/// Sum of (xi - weight * error).
inline double objective_score(const std::vector<SampleScore>& samples, double error_weight = 1.0) {
  double total = 0;
  for (const auto& s : samples) {
    if (!(s.xi >= 0 && s.xi <= 1)) throw UsageError("efficiency must lie in [0, 1]");
    if (!(s.error >= 0)) throw UsageError("error must be non-negative");
    total += s.xi - error_weight * s.error;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Calibration samples
// ---------------------------------------------------------------------------

struct CalibrationSample {
  CorpusEntry entry;
  std::string reference_text;
};

inline CalibrationSample calibration_sample_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  CalibrationSample s{corpus_entry_from_json(j, base_dir), detail::require(j, "reference_text").get<std::string>()};
  if (s.reference_text.empty()) throw ValidationError("reference_text must be non-empty");
  return s;
}

inline Json to_json(const CalibrationSample& s) {
  Json j = to_json(s.entry);
  j["reference_text"] = s.reference_text;
  return j;
}

inline std::vector<CalibrationSample> read_calibration_samples(const std::filesystem::path& path) {
  std::vector<CalibrationSample> out;
  for_each_jsonl(path, [&](std::size_t, const Json& j) { out.push_back(calibration_sample_from_json(j, path.parent_path())); });
  return out;
}

/// Samples plus the replay generators (and optionally per-segment references)
/// that cover them.
struct CalibrationSet {
  std::vector<CalibrationSample> samples;
  GeneratorList generators;
  std::shared_ptr<const TranscriptSource> segment_references;
  const LanguageModel* lm = nullptr;
};

// ---------------------------------------------------------------------------
// Search space
// ---------------------------------------------------------------------------

enum class Hyperparameter { pwer_threshold, pcer_threshold, ppl_threshold, max_segment_len, max_chunk_len, merge_gap_tol };

inline constexpr std::array kAllHyperparameters = {
    Hyperparameter::pwer_threshold, Hyperparameter::pcer_threshold, Hyperparameter::ppl_threshold,
    Hyperparameter::max_segment_len, Hyperparameter::max_chunk_len, Hyperparameter::merge_gap_tol};

inline std::string_view to_string(Hyperparameter h) {
  switch (h) {
    case Hyperparameter::pwer_threshold: return "pwer_threshold";
    case Hyperparameter::pcer_threshold: return "pcer_threshold";
    case Hyperparameter::ppl_threshold: return "ppl_threshold";
    case Hyperparameter::max_segment_len: return "max_segment_len";
    case Hyperparameter::max_chunk_len: return "max_chunk_len";
    case Hyperparameter::merge_gap_tol: return "merge_gap_tol";
  }
  return "?";
}

inline bool is_duration(Hyperparameter h) {
  return h == Hyperparameter::max_segment_len || h == Hyperparameter::max_chunk_len ||
         h == Hyperparameter::merge_gap_tol;
}

/// Sets one hyperparameter; durations are given in seconds.
inline void apply(PipelineConfig& c, Hyperparameter h, double value) {
  switch (h) {
    case Hyperparameter::pwer_threshold: c.pwer_threshold = value; break;
    case Hyperparameter::pcer_threshold: c.pcer_threshold = value; break;
    case Hyperparameter::ppl_threshold: c.ppl_threshold = value; break;
    case Hyperparameter::max_segment_len: c.max_segment_len = from_seconds(value); break;
    case Hyperparameter::max_chunk_len: c.max_chunk_len = from_seconds(value); break;
    case Hyperparameter::merge_gap_tol: c.merge_gap_tol = from_seconds(value); break;
  }
}

inline double get(const PipelineConfig& c, Hyperparameter h) {
  switch (h) {
    case Hyperparameter::pwer_threshold: return c.pwer_threshold;
    case Hyperparameter::pcer_threshold: return c.pcer_threshold;
    case Hyperparameter::ppl_threshold: return c.ppl_threshold;
    case Hyperparameter::max_segment_len: return to_seconds(c.max_segment_len);
    case Hyperparameter::max_chunk_len: return to_seconds(c.max_chunk_len);
    case Hyperparameter::merge_gap_tol: return to_seconds(c.merge_gap_tol);
  }
  return 0;
}

/// A finite list of values, or a continuous [min, max] range.
struct Dimension {
  Hyperparameter parameter;
  std::vector<double> values;
  double min = 0, max = 0;

  bool finite() const noexcept { return !values.empty(); }

  /// True when `v` is one of the listed values or inside the range.
  bool contains(double v) const {
    if (finite() && is_duration(parameter))
      return std::any_of(values.begin(), values.end(), [&](double x) { return from_seconds(x) == from_seconds(v); });
    if (finite()) return std::find(values.begin(), values.end(), v) != values.end();
    if (is_duration(parameter)) {
      auto ms = from_seconds(v);
      return ms >= from_seconds(min) && ms <= from_seconds(max);
    }
    return v >= min && v <= max;
  }
};

enum class SearchMode { automatic, grid, random };

struct SearchSpace {
  /// In canonical hyperparameter order, each at most once.
  std::vector<Dimension> dimensions;
  std::size_t budget = 1;
  std::uint64_t seed = 0;
  SearchMode mode = SearchMode::automatic;
  PipelineConfig base;
  double error_weight = 1.0;
  /// Efficiency against speech duration rather than full audio duration.
  bool speech_relative = false;

  bool finite() const {
    return std::all_of(dimensions.begin(), dimensions.end(), [](const Dimension& d) { return d.finite(); });
  }
  std::size_t grid_size() const {
    std::size_t n = 1;
    for (const auto& d : dimensions) n *= d.values.size();
    return n;
  }
  bool contains(const PipelineConfig& c) const {
    for (const auto& d : dimensions) {
      if (!d.contains(get(c, d.parameter))) return false;
    }
    return true;
  }
};

inline void validate(const SearchSpace& s) {
  if (s.budget < 1) throw ValidationError("budget must be at least 1");
  for (const auto& d : s.dimensions) {
    if (!d.finite() && !(d.min <= d.max)) throw ValidationError(std::string(to_string(d.parameter)) + " range is empty");
    if (!d.finite() && !(std::isfinite(d.min) && std::isfinite(d.max)))
      throw ValidationError(std::string(to_string(d.parameter)) + " range must be finite");
  }
  if (s.mode == SearchMode::grid && !s.finite()) throw ValidationError("grid mode needs finite value lists");
  if (s.mode == SearchMode::grid && s.grid_size() > s.budget)
    throw ValidationError("grid of " + std::to_string(s.grid_size()) + " candidates exceeds budget " +
                          std::to_string(s.budget));
  if (!(s.error_weight >= 0)) throw ValidationError("error_weight must be non-negative");
}

/// Hyperparameters are top-level keys holding a list, `{min, max, steps}` (an
/// evenly spaced grid) or `{min, max}` (continuous). Durations are in seconds.
inline SearchSpace search_space_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("search space must be a JSON object");
  SearchSpace s;
  s.budget = j.value("budget", std::size_t{1});
  s.seed = j.value("seed", std::uint64_t{0});
  s.error_weight = j.value("error_weight", 1.0);
  s.speech_relative = j.value("speech_relative", false);
  if (j.contains("base")) s.base = config_from_json(j["base"]);
  const auto mode = j.value("mode", std::string("auto"));
  if (mode == "auto") s.mode = SearchMode::automatic;
  else if (mode == "grid") s.mode = SearchMode::grid;
  else if (mode == "random") s.mode = SearchMode::random;
  else throw ValidationError("unknown search mode '" + mode + "'");

  static const std::set<std::string> kMeta = {"budget", "seed", "error_weight", "speech_relative", "base", "mode"};
  for (const auto& [key, value] : j.items()) {
    if (kMeta.count(key)) continue;
    const std::string name = key == "gap_tol" ? "merge_gap_tol" : key;
    auto h = std::find_if(kAllHyperparameters.begin(), kAllHyperparameters.end(),
                          [&](Hyperparameter p) { return to_string(p) == name; });
    if (h == kAllHyperparameters.end()) throw ValidationError("unknown search space key '" + key + "'");
  }
  for (auto h : kAllHyperparameters) {
    std::string name(to_string(h));
    const Json* v = j.contains(name) ? &j[name] : (h == Hyperparameter::merge_gap_tol && j.contains("gap_tol") ? &j["gap_tol"] : nullptr);
    if (!v) continue;
    Dimension d{h, {}, 0, 0};
    if (v->is_array()) {
      if (v->empty()) throw ValidationError(name + " has no values");
      for (const auto& x : *v) d.values.push_back(detail::number_or_inf(x));
    } else if (v->is_object()) {
      d.min = detail::require(*v, "min").get<double>();
      d.max = detail::require(*v, "max").get<double>();
      if (v->contains("steps")) {
        auto steps = (*v)["steps"].get<std::size_t>();
        if (steps == 0) throw ValidationError(name + " needs at least one step");
        for (std::size_t i = 0; i < steps; ++i)
          d.values.push_back(steps == 1 ? d.min : d.min + (d.max - d.min) * static_cast<double>(i) / static_cast<double>(steps - 1));
      }
    } else {
      throw ValidationError(name + " must be a list or a range object");
    }
    s.dimensions.push_back(std::move(d));
  }
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

struct CandidatePlan {
  SearchMode mode = SearchMode::grid;
  std::vector<PipelineConfig> configs;
};

/// Grid point `index` in mixed radix, first dimension most significant.
inline PipelineConfig grid_point(const SearchSpace& s, std::size_t index) {
  PipelineConfig c = s.base;
  for (auto d = s.dimensions.rbegin(); d != s.dimensions.rend(); ++d) {
    apply(c, d->parameter, d->values[index % d->values.size()]);
    index /= d->values.size();
  }
  return c;
}

/// Exhaustive grid when the space is finite and fits the budget (or grid mode is
/// forced); otherwise seeded random search. A finite grid is sampled without
/// replacement, so a budget equal to the grid size visits every point.
inline CandidatePlan plan_candidates(const SearchSpace& s) {
  validate(s);
  CandidatePlan plan;
  const bool finite = s.finite();
  plan.mode = s.mode == SearchMode::automatic ? (finite && s.grid_size() <= s.budget ? SearchMode::grid : SearchMode::random)
                                              : s.mode;
  if (plan.mode == SearchMode::grid) {
    for (std::size_t i = 0; i < s.grid_size(); ++i) plan.configs.push_back(grid_point(s, i));
    return plan;
  }
  Rng rng(splitmix64(s.seed));
  if (finite) {
    std::vector<std::size_t> order(s.grid_size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t take = std::min(s.budget, order.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(order[i], order[i + rng.index(order.size() - i)]);
      plan.configs.push_back(grid_point(s, order[i]));
    }
    return plan;
  }
  for (std::size_t b = 0; b < s.budget; ++b) {
    PipelineConfig c = s.base;
    for (const auto& d : s.dimensions) {
      double v;
      if (d.finite()) {
        v = d.values[rng.index(d.values.size())];
      } else if (is_duration(d.parameter)) {
        v = to_seconds(Millis{rng.between(from_seconds(d.min).count(), from_seconds(d.max).count())});
      } else {
        v = d.min + (d.max - d.min) * rng.uniform();
      }
      apply(c, d.parameter, v);
    }
    plan.configs.push_back(std::move(c));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct SampleEvaluation {
  std::string audio_id;
  double xi = 0;
  PipelineError error;
  std::size_t admitted_segments = 0;
};

struct CandidateResult {
  std::size_t index = 0;
  PipelineConfig config;
  bool valid = true;
  double score = 0;
  std::vector<SampleEvaluation> per_sample;
  std::vector<std::string> diagnostics;
};

inline Json to_json(const CandidateResult& r) {
  Json per = Json::array();
  for (const auto& s : r.per_sample) {
    per.push_back(Json{{"audio_id", s.audio_id},
                       {"xi", s.xi},
                       {"L", s.error.value},
                       {"fallback", s.error.concatenation_fallback},
                       {"defined", s.error.defined},
                       {"admitted_segments", s.admitted_segments}});
  }
  return Json{{"index", r.index},
              {"config", to_json(r.config)},
              {"valid", r.valid},
              {"score", r.valid ? Json(r.score) : Json(nullptr)},
              {"per_sample", std::move(per)},
              {"diagnostics", r.diagnostics}};
}

/// Runs the full pipeline with `config` on every sample. Failures mark the
/// candidate invalid instead of throwing.
inline CandidateResult evaluate_candidate(const PipelineConfig& config, const CalibrationSet& set,
                                          double error_weight = 1.0, bool speech_relative = false) {
  CandidateResult r;
  r.config = config;
  for (const auto& v : validate_config(config)) r.diagnostics.push_back(v);
  if (!r.diagnostics.empty()) {
    r.valid = false;
    return r;
  }
  std::vector<SampleScore> scores;
  for (const auto& sample : set.samples) {
    const auto& id = sample.entry.audio.id;
    try {
      AudioJob job = sample.entry.load();
      AudioOutcome o = process_audio(job, set.generators, set.lm, config);
      SampleEvaluation e{id, 0, {}, 0};
      std::vector<Segment> admitted;
      std::vector<SelectedLabel> labels;
      std::size_t misses = 0;
      for (const auto& s : o.selections) {
        if (s.decision == Decision::dropped_generator) ++misses;
        if (s.decision != Decision::admitted) continue;
        admitted.push_back(s.segment);
        labels.push_back({s.segment, *s.chosen});
      }
      if (misses) r.diagnostics.push_back(id + ": " + std::to_string(misses) + " segment(s) missing a replay hypothesis");
      e.admitted_segments = admitted.size();
      std::optional<Millis> denom;
      if (speech_relative) denom = o.speech;
      e.xi = admitted.empty() ? 0.0 : efficiency(job.audio.duration, admitted, denom);
      e.error = pipeline_error(sample.reference_text, labels, config.normalization, set.segment_references.get());
      scores.push_back({e.xi, e.error.defined ? e.error.value : 0.0});
      r.per_sample.push_back(std::move(e));
    } catch (const std::exception& ex) {
      r.valid = false;
      r.diagnostics.push_back(id + ": " + ex.what());
    }
  }
  if (r.valid) r.score = objective_score(scores, error_weight);
  return r;
}

struct CalibrationResult {
  SearchMode mode = SearchMode::grid;
  PipelineConfig best_config;
  double best_score = 0;
  std::size_t best_index = 0;
  std::vector<CandidateResult> trace;
};

/// Evaluates every planned candidate (in parallel when `workers` > 1) and returns
/// the highest-scoring valid one; ties go to the earliest candidate. `on_result`
/// sees each candidate in index order.
inline CalibrationResult calibrate(const SearchSpace& space, const CalibrationSet& set, std::size_t workers = 1,
                                   const std::function<void(const CandidateResult&)>& on_result = {}) {
  if (set.samples.empty()) throw ValidationError("calibration needs at least one sample");
  auto plan = plan_candidates(space);
  CalibrationResult out;
  out.mode = plan.mode;
  std::optional<std::size_t> best;
  ordered_parallel_for<CandidateResult>(
      plan.configs.size(), workers,
      [&](std::size_t i) {
        auto r = evaluate_candidate(plan.configs[i], set, space.error_weight, space.speech_relative);
        r.index = i;
        return r;
      },
      [&](std::size_t, CandidateResult&& r) {
        if (on_result) on_result(r);
        if (r.valid && (!best || r.score > out.trace[*best].score)) best = out.trace.size();
        out.trace.push_back(std::move(r));
      });
  if (!best) throw ValidationError("no valid candidate in the search space");
  out.best_index = *best;
  out.best_config = out.trace[*best].config;
  out.best_score = out.trace[*best].score;
  return out;
}

}  // namespace weaklabel
