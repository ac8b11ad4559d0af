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

// VAD and diarization event streams to candidate segments.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "weaklabel/datamodel.hpp"
#include "weaklabel/manifest.hpp"

namespace weaklabel {

enum class VadKind { speech, nonspeech };

struct VadEvent {
  Millis start{0};
  Millis end{0};
  VadKind kind = VadKind::speech;

  Millis duration() const noexcept { return end - start; }
  friend bool operator==(const VadEvent&, const VadEvent&) = default;
};

struct SpeakerInterval {
  std::string speaker_id;
  Millis start{0};
  Millis end{0};

  friend bool operator==(const SpeakerInterval&, const SpeakerInterval&) = default;
};

/// Events must be well-formed, time-ordered and pairwise disjoint.
inline void validate_vad(const std::vector<VadEvent>& events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.start < Millis{0}) throw ValidationError("VAD event " + std::to_string(i) + " starts before 0");
    if (e.start >= e.end) throw ValidationError("VAD event " + std::to_string(i) + " has start >= end");
    if (i > 0 && events[i - 1].end > e.start)
      throw ValidationError("VAD events " + std::to_string(i - 1) + " and " + std::to_string(i) +
                            " overlap or are out of order");
  }
}

inline Millis total_speech(const std::vector<VadEvent>& events) {
  Millis total{0};
  for (const auto& e : events) {
    if (e.kind == VadKind::speech) total += e.duration();
  }
  return total;
}

/// Cuts speech into segments no longer than `max_len`.
///
/// Touching speech events form one region; the boundaries between them are the
/// preferred cut points. An over-long region is cut at the latest boundary inside
/// the current window that leaves both sides at least `min_len`, else hard-cut at
/// exactly `max_len` (pulled back so the tail is not shorter than `min_len`).
/// The output tiles the speech exactly. Regions shorter than `min_len` come out
/// as segments flagged too_short.
inline std::vector<Segment> split_by_vad(const std::string& parent_id,
                                         const std::vector<VadEvent>& events, Millis max_len,
                                         Millis min_len = Millis{200}) {
  if (max_len <= Millis{0}) throw UsageError("max_segment_len must be positive");
  validate_vad(events);
  std::vector<Segment> out;
  auto emit = [&](Millis s, Millis e) {
    Segment seg{parent_id, s, e, false, {}};
    if (e - s < min_len) seg.quality_flags.insert(QualityFlag::too_short);
    out.push_back(std::move(seg));
  };

  std::size_t i = 0;
  while (i < events.size()) {
    if (events[i].kind != VadKind::speech) {
      ++i;
      continue;
    }
    const Millis region_start = events[i].start;
    std::vector<Millis> boundaries;
    Millis region_end = events[i].end;
    for (++i; i < events.size() && events[i].kind == VadKind::speech && events[i].start == region_end; ++i) {
      boundaries.push_back(region_end);
      region_end = events[i].end;
    }

    Millis pos = region_start;
    auto next_boundary = boundaries.begin();
    while (region_end - pos > max_len) {
      const Millis window_end = pos + max_len;
      Millis cut{-1};
      for (auto it = next_boundary; it != boundaries.end() && *it <= window_end; ++it) {
        if (*it - pos >= min_len && region_end - *it >= min_len) cut = *it;
      }
      if (cut < Millis{0}) {
        cut = window_end;
        if (region_end - cut < min_len && region_end - min_len > pos) cut = region_end - min_len;
      }
      emit(pos, cut);
      pos = cut;
      while (next_boundary != boundaries.end() && *next_boundary <= pos) ++next_boundary;
    }
    emit(pos, region_end);
  }
  return out;
}

/// Marks segments in which two distinct speakers talk at once for a positive
/// duration. Boundaries are never changed.
inline std::vector<Segment> flag_overlap(std::vector<Segment> segments,
                                         const std::vector<SpeakerInterval>& diarization) {
  struct Clip {
    Millis start, end;
    const std::string* speaker;
  };
  std::vector<Clip> clips;
  for (auto& seg : segments) {
    clips.clear();
    for (const auto& iv : diarization) {
      Millis s = std::max(iv.start, seg.start), e = std::min(iv.end, seg.end);
      if (s < e) clips.push_back({s, e, &iv.speaker_id});
    }
    bool overlap = false;
    for (std::size_t a = 0; a < clips.size() && !overlap; ++a) {
      for (std::size_t b = a + 1; b < clips.size() && !overlap; ++b) {
        if (*clips[a].speaker == *clips[b].speaker) continue;
        overlap = std::max(clips[a].start, clips[b].start) < std::min(clips[a].end, clips[b].end);
      }
    }
    if (overlap) {
      seg.overlap_flag = true;
      seg.quality_flags.insert(QualityFlag::overlapping_speakers);
    }
  }
  return segments;
}

inline Json to_json(const VadEvent& e) {
  return Json{{"start", seconds_json(e.start)},
              {"end", seconds_json(e.end)},
              {"kind", e.kind == VadKind::speech ? "speech" : "nonspeech"}};
}

inline VadEvent vad_event_from_json(const Json& j) {
  VadEvent e;
  e.start = seconds_from_json(detail::require(j, "start"));
  e.end = seconds_from_json(detail::require(j, "end"));
  auto kind = j.value("kind", std::string("speech"));
  if (kind == "speech") e.kind = VadKind::speech;
  else if (kind == "nonspeech") e.kind = VadKind::nonspeech;
  else throw ValidationError("unknown VAD event kind '" + kind + "'");
  if (e.start >= e.end) throw ValidationError("VAD event has start >= end");
  return e;
}

inline Json to_json(const SpeakerInterval& s) {
  return Json{{"speaker_id", s.speaker_id}, {"start", seconds_json(s.start)}, {"end", seconds_json(s.end)}};
}

inline SpeakerInterval speaker_interval_from_json(const Json& j) {
  SpeakerInterval s;
  s.speaker_id = detail::require(j, "speaker_id").get<std::string>();
  s.start = seconds_from_json(detail::require(j, "start"));
  s.end = seconds_from_json(detail::require(j, "end"));
  if (s.start >= s.end) throw ValidationError("speaker interval has start >= end");
  return s;
}

inline std::vector<VadEvent> read_vad_events(const std::filesystem::path& path) {
  std::vector<VadEvent> events;
  for_each_jsonl(path, [&](std::size_t, const Json& j) { events.push_back(vad_event_from_json(j)); });
  validate_vad(events);
  return events;
}

inline std::vector<SpeakerInterval> read_speaker_intervals(const std::filesystem::path& path) {
  std::vector<SpeakerInterval> out;
  for_each_jsonl(path, [&](std::size_t, const Json& j) { out.push_back(speaker_interval_from_json(j)); });
  return out;
}

}  // namespace weaklabel
