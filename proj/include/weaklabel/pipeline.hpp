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

// End-to-end weak-label generation: per audio, segment -> flag overlap ->
// generate -> agreement gate -> medoid -> perplexity gate -> merge.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "weaklabel/datamodel.hpp"
#include "weaklabel/generators.hpp"
#include "weaklabel/language_model.hpp"
#include "weaklabel/manifest.hpp"
#include "weaklabel/merging.hpp"
#include "weaklabel/parallel.hpp"
#include "weaklabel/segmentation.hpp"
#include "weaklabel/selection.hpp"

namespace weaklabel {

using GeneratorList = std::vector<std::shared_ptr<const HypothesisGenerator>>;

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

struct AudioJob {
  AudioAsset audio;
  std::vector<VadEvent> vad;
  std::vector<SpeakerInterval> diarization;
};

/// One corpus manifest line. Event streams are inline or loaded lazily from files,
/// so a missing event file fails only its own audio.
struct CorpusEntry {
  AudioAsset audio;
  std::variant<std::vector<VadEvent>, std::filesystem::path> vad;
  std::variant<std::vector<SpeakerInterval>, std::filesystem::path> diarization;

  AudioJob load() const {
    AudioJob job{audio, {}, {}};
    if (auto* p = std::get_if<std::filesystem::path>(&vad)) job.vad = read_vad_events(*p);
    else job.vad = std::get<std::vector<VadEvent>>(vad);
    if (auto* p = std::get_if<std::filesystem::path>(&diarization)) {
      if (!p->empty()) job.diarization = read_speaker_intervals(*p);
    } else {
      job.diarization = std::get<std::vector<SpeakerInterval>>(diarization);
    }
    return job;
  }
};

inline Json to_json(const CorpusEntry& e) {
  Json j = to_json(e.audio);
  auto events = [](const auto& v) {
    Json arr = Json::array();
    for (const auto& x : v) arr.push_back(to_json(x));
    return arr;
  };
  if (auto* p = std::get_if<std::filesystem::path>(&e.vad)) j["vad"] = p->string();
  else j["vad"] = events(std::get<std::vector<VadEvent>>(e.vad));
  if (auto* p = std::get_if<std::filesystem::path>(&e.diarization)) j["diarization"] = p->string();
  else j["diarization"] = events(std::get<std::vector<SpeakerInterval>>(e.diarization));
  return j;
}

inline CorpusEntry corpus_entry_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  CorpusEntry e;
  e.audio = audio_asset_from_json(j);
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  const Json& vad = detail::require(j, "vad");
  if (vad.is_string()) {
    e.vad = resolve(vad.get<std::string>());
  } else {
    std::vector<VadEvent> v;
    for (const auto& x : vad) v.push_back(vad_event_from_json(x));
    e.vad = std::move(v);
  }
  auto it = j.find("diarization");
  if (it == j.end() || it->is_null()) {
    e.diarization = std::vector<SpeakerInterval>{};
  } else if (it->is_string()) {
    e.diarization = resolve(it->get<std::string>());
  } else {
    std::vector<SpeakerInterval> v;
    for (const auto& x : *it) v.push_back(speaker_interval_from_json(x));
    e.diarization = std::move(v);
  }
  return e;
}

/// Event-file paths inside the manifest are relative to the manifest's directory.
inline std::vector<CorpusEntry> read_corpus(const std::filesystem::path& path) {
  std::vector<CorpusEntry> out;
  std::set<std::string> ids;
  const auto base = path.parent_path();
  for_each_jsonl(path, [&](std::size_t line, const Json& j) {
    out.push_back(corpus_entry_from_json(j, base));
    if (!ids.insert(out.back().audio.id).second)
      throw ParseError(line, "duplicate audio id '" + out.back().audio.id + "'");
  });
  return out;
}

// ---------------------------------------------------------------------------
// Per-audio processing
// ---------------------------------------------------------------------------

struct StageTimings {
  std::chrono::nanoseconds segmentation{0};
  std::chrono::nanoseconds generation{0};
  std::chrono::nanoseconds selection{0};
  std::chrono::nanoseconds perplexity{0};
  std::chrono::nanoseconds merging{0};

  StageTimings& operator+=(const StageTimings& o) {
    segmentation += o.segmentation;
    generation += o.generation;
    selection += o.selection;
    perplexity += o.perplexity;
    merging += o.merging;
    return *this;
  }
};

struct AudioOutcome {
  AudioAsset audio;
  Millis speech{0};
  std::vector<SelectionResult> selections;
  std::vector<Chunk> chunks;
  StageTimings timings;
};

namespace detail {

class StageClock {
 public:
  explicit StageClock(std::chrono::nanoseconds& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~StageClock() { sink_ += std::chrono::steady_clock::now() - start_; }

 private:
  std::chrono::nanoseconds& sink_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Runs every stage on one audio. Generator misses drop the segment; backend
/// errors and invalid event streams propagate so the caller can skip the audio.
inline AudioOutcome process_audio(const AudioJob& job, const GeneratorList& generators, const LanguageModel* lm,
                                  const PipelineConfig& config) {
  if (generators.size() < 2) throw UsageError("the pipeline needs at least two generators");
  AudioOutcome out;
  out.audio = job.audio;
  std::vector<Segment> segments;
  {
    detail::StageClock clock(out.timings.segmentation);
    for (const auto& e : job.vad) {
      if (e.end > job.audio.duration)
        throw ValidationError("VAD event past the end of audio '" + job.audio.id + "'");
    }
    segments = flag_overlap(split_by_vad(job.audio.id, job.vad, config.max_segment_len, config.min_segment_len),
                            job.diarization);
  }
  out.speech = total_speech(job.vad);

  std::vector<LabeledSegment> admitted;
  for (auto& seg : segments) {
    SelectionResult r;
    r.segment = seg;
    if (seg.has(QualityFlag::too_short)) {
      r.decision = Decision::dropped_length;
    } else if (seg.overlap_flag) {
      r.decision = Decision::dropped_overlap;
    } else if (seg.duration() > config.max_segment_len) {
      r.segment.quality_flags.insert(QualityFlag::too_long);
      r.decision = Decision::dropped_length;
    } else {
      bool missed = false;
      {
        detail::StageClock clock(out.timings.generation);
        for (const auto& g : generators) {
          try {
            r.hypotheses.push_back(g->generate(seg, job.audio.uri));
          } catch (const GeneratorMiss&) {
            missed = true;
          }
        }
      }
      if (missed) {
        r.decision = Decision::dropped_generator;
      } else {
        std::optional<Hypothesis> best;
        {
          detail::StageClock clock(out.timings.selection);
          auto verdict = admit_by_agreement(r.hypotheses, config);
          r.stats = verdict.stats;
          r.decision = verdict.decision;
          if (r.decision == Decision::admitted) {
            best = select_hypothesis(r.hypotheses, UnitKind::word, config.normalization);
            // An empty medoid means the generators agree there is nothing to label.
            if (normalize(best->text, config.normalization, UnitKind::word).empty()) {
              r.decision = Decision::dropped_agreement;
              best.reset();
            }
          }
          if (r.decision == Decision::dropped_agreement) r.segment.quality_flags.insert(QualityFlag::low_agreement);
        }
        if (best) {
          detail::StageClock clock(out.timings.perplexity);
          auto pv = admit_by_perplexity(*best, lm, config.ppl_threshold);
          r.perplexity = pv.perplexity;
          r.decision = pv.decision;
          if (r.decision == Decision::admitted) {
            r.chosen = *best;
            admitted.push_back({r.segment, best->text});
          } else {
            r.segment.quality_flags.insert(QualityFlag::high_perplexity);
          }
        }
      }
    }
    out.selections.push_back(std::move(r));
  }

  {
    detail::StageClock clock(out.timings.merging);
    out.chunks = merge_segments(admitted, config.max_chunk_len, config.merge_gap_tol);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run summary
// ---------------------------------------------------------------------------

struct RunSummary {
  std::size_t audios_processed = 0;
  std::size_t audios_skipped = 0;
  std::size_t segments_created = 0;
  std::map<Decision, std::size_t> segments_by_decision;
  std::map<Decision, Millis> duration_by_decision;
  std::size_t chunks_emitted = 0;
  Millis speech_duration{0};
  /// Summed member-segment durations over all chunks.
  Millis admitted_duration{0};
  StageTimings timings;
  std::vector<std::string> generator_ids;

  std::size_t count(Decision d) const {
    auto it = segments_by_decision.find(d);
    return it == segments_by_decision.end() ? 0 : it->second;
  }
  Millis duration(Decision d) const {
    auto it = duration_by_decision.find(d);
    return it == duration_by_decision.end() ? Millis{0} : it->second;
  }
  double admitted_hours() const { return static_cast<double>(admitted_duration.count()) / 3.6e6; }

  void add(const AudioOutcome& o) {
    ++audios_processed;
    speech_duration += o.speech;
    segments_created += o.selections.size();
    for (const auto& s : o.selections) {
      ++segments_by_decision[s.decision];
      duration_by_decision[s.decision] += s.segment.duration();
    }
    chunks_emitted += o.chunks.size();
    for (const auto& c : o.chunks) admitted_duration += c.speech_duration();
    timings += o.timings;
  }

  /// Empty iff every conservation invariant holds.
  std::vector<std::string> conservation_violations() const {
    std::vector<std::string> v;
    std::size_t counted = 0;
    Millis accounted{0};
    for (const auto& [d, n] : segments_by_decision) counted += n;
    for (const auto& [d, t] : duration_by_decision) accounted += t;
    if (counted != segments_created) v.emplace_back("segment counts do not sum to segments created");
    if (accounted != speech_duration) v.emplace_back("decision durations do not sum to speech duration");
    if (admitted_duration != duration(Decision::admitted))
      v.emplace_back("chunked duration differs from admitted segment duration");
    return v;
  }
};

inline Json to_json(const RunSummary& s, bool include_timings = true) {
  Json by_decision = Json::object();
  for (auto d : kAllDecisions) {
    by_decision[std::string(to_string(d))] = Json{{"segments", s.count(d)}, {"seconds", seconds_json(s.duration(d))}};
  }
  Json j{{"audios_processed", s.audios_processed},
         {"audios_skipped", s.audios_skipped},
         {"segments_created", s.segments_created},
         {"decisions", std::move(by_decision)},
         {"chunks_emitted", s.chunks_emitted},
         {"speech_seconds", seconds_json(s.speech_duration)},
         {"admitted_seconds", seconds_json(s.admitted_duration)},
         {"admitted_hours", s.admitted_hours()},
         {"generator_ids", s.generator_ids}};
  if (include_timings) {
    auto sec = [](std::chrono::nanoseconds ns) { return std::chrono::duration<double>(ns).count(); };
    j["timings"] = Json{{"segmentation", sec(s.timings.segmentation)},
                        {"generation", sec(s.timings.generation)},
                        {"selection", sec(s.timings.selection)},
                        {"perplexity", sec(s.timings.perplexity)},
                        {"merging", sec(s.timings.merging)}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct AudioFailure {
  std::string audio_id;
  std::string message;
};

struct RunOptions {
  std::size_t workers = 1;
  /// Structured progress lines; null silences them.
  std::function<void(const std::string&)> log = [](const std::string& line) { std::cerr << line << '\n'; };
};

/// Called once per successfully processed audio, in corpus order.
using OutcomeSink = std::function<void(const AudioOutcome&)>;

struct RunResult {
  RunSummary summary;
  std::vector<AudioFailure> failures;
};

/// Picks generators by `config.generator_ids` (all of them when the list is empty).
inline GeneratorList select_generators(const GeneratorList& available, const PipelineConfig& config) {
  if (config.generator_ids.empty()) return available;
  GeneratorList out;
  for (const auto& id : config.generator_ids) {
    auto it = std::find_if(available.begin(), available.end(), [&](const auto& g) { return g->id() == id; });
    if (it == available.end()) throw ValidationError("config names unknown generator '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

inline RunResult run_pipeline(const std::vector<CorpusEntry>& corpus, const GeneratorList& available,
                              const LanguageModel* lm, const PipelineConfig& config, const OutcomeSink& sink,
                              const RunOptions& options = {}) {
  require_valid(config);
  GeneratorList generators = select_generators(available, config);
  if (generators.size() < 2) throw ValidationError("the pipeline needs at least two generators");

  RunResult result;
  for (const auto& g : generators) result.summary.generator_ids.push_back(g->id());
  struct Attempt {
    std::optional<AudioOutcome> outcome;
    std::string error;
  };
  ordered_parallel_for<Attempt>(
      corpus.size(), options.workers,
      [&](std::size_t i) {
        Attempt a;
        try {
          a.outcome = process_audio(corpus[i].load(), generators, lm, config);
        } catch (const std::exception& e) {
          a.error = e.what();
        }
        return a;
      },
      [&](std::size_t i, Attempt&& a) {
        const auto& id = corpus[i].audio.id;
        if (!a.outcome) {
          ++result.summary.audios_skipped;
          result.failures.push_back({id, a.error});
          if (options.log) options.log("event=audio_skipped audio=" + id + " error=\"" + a.error + "\"");
          return;
        }
        result.summary.add(*a.outcome);
        if (sink) sink(*a.outcome);
        if (options.log) {
          options.log("event=audio_done audio=" + id + " index=" + std::to_string(i) +
                      " segments=" + std::to_string(a.outcome->selections.size()) +
                      " chunks=" + std::to_string(a.outcome->chunks.size()) +
                      " admitted_total=" + std::to_string(result.summary.count(Decision::admitted)));
        }
      });
  return result;
}

struct CollectedRun {
  std::vector<Chunk> chunks;
  std::vector<SelectionResult> selections;
  RunResult run;
};

inline CollectedRun run_pipeline(const std::vector<CorpusEntry>& corpus, const GeneratorList& generators,
                                 const LanguageModel* lm, const PipelineConfig& config,
                                 const RunOptions& options = {}) {
  CollectedRun out;
  out.run = run_pipeline(
      corpus, generators, lm, config,
      [&](const AudioOutcome& o) {
        out.chunks.insert(out.chunks.end(), o.chunks.begin(), o.chunks.end());
        out.selections.insert(out.selections.end(), o.selections.begin(), o.selections.end());
      },
      options);
  return out;
}

// ---------------------------------------------------------------------------
// Iterations
// ---------------------------------------------------------------------------

inline constexpr const char* kChunksFile = "chunks.jsonl";
inline constexpr const char* kSelectionsFile = "selections.jsonl";
inline constexpr const char* kRunFile = "run.json";

inline std::string iteration_dir_name(int index) {
  std::string n = std::to_string(index);
  return "iter-" + std::string(n.size() < 3 ? 3 - n.size() : 0, '0') + n;
}

/// Highest existing iteration index under `root`, 0 when there is none.
inline int latest_iteration(const std::filesystem::path& root) {
  int best = 0;
  if (!std::filesystem::is_directory(root)) return 0;
  static const std::regex kPattern(R"(iter-(\d+))");
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    std::smatch m;
    std::string name = entry.path().filename().string();
    if (entry.is_directory() && std::regex_match(name, m, kPattern)) best = std::max(best, std::stoi(m[1]));
  }
  return best;
}

struct IterationResult {
  int index = 0;
  std::filesystem::path dir;
  RunResult run;
};

/// Streams the run into a fresh `iter-NNN` directory under `root`. Earlier
/// iterations are never touched; the new directory must not exist yet.
inline IterationResult run_iteration(const std::filesystem::path& root, const std::vector<CorpusEntry>& corpus,
                                     const GeneratorList& generators, const LanguageModel* lm,
                                     const PipelineConfig& config, const RunOptions& options = {}) {
  require_valid(config);
  IterationResult it;
  const int previous = latest_iteration(root);
  it.index = previous + 1;
  it.dir = root / iteration_dir_name(it.index);
  std::filesystem::create_directories(root);
  if (!std::filesystem::create_directory(it.dir))
    throw IoError("iteration directory '" + it.dir.string() + "' already exists");

  ManifestWriter chunks(it.dir / kChunksFile);
  ManifestWriter selections(it.dir / kSelectionsFile);
  it.run = run_pipeline(
      corpus, generators, lm, config,
      [&](const AudioOutcome& o) {
        for (const auto& c : o.chunks) chunks.write(c);
        for (const auto& s : o.selections) selections.write(s);
      },
      options);
  chunks.flush();
  selections.flush();

  Json failures = Json::array();
  for (const auto& f : it.run.failures) failures.push_back(Json{{"audio_id", f.audio_id}, {"error", f.message}});
  save_json_file(Json{{"iteration", it.index},
                      {"previous", previous ? Json(iteration_dir_name(previous)) : Json(nullptr)},
                      {"generator_ids", it.run.summary.generator_ids},
                      {"config", to_json(config)},
                      {"summary", to_json(it.run.summary)},
                      {"failures", std::move(failures)}},
                 it.dir / kRunFile);
  return it;
}

}  // namespace weaklabel
