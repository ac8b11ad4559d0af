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

#include <string>
#include <vector>

#include "weaklabel/datamodel.hpp"

namespace weaklabel {

struct LabeledSegment {
  Segment segment;
  std::string transcript;
};

/// Greedy left-to-right packing of consecutive admitted segments. A segment joins
/// the open chunk iff the chunk span stays within `max_chunk_len` and the silence
/// since the previous member is at most `gap_tol`. The span runs from the first
/// member's start to the last member's end, interior gaps included.
inline std::vector<Chunk> merge_segments(const std::vector<LabeledSegment>& admitted, Millis max_chunk_len,
                                         Millis gap_tol) {
  for (std::size_t i = 0; i < admitted.size(); ++i) {
    const auto& s = admitted[i].segment;
    if (s.start >= s.end) throw ValidationError("segment with start >= end");
    if (s.duration() > max_chunk_len) throw ValidationError("segment longer than max_chunk_len");
    if (i == 0) continue;
    const auto& prev = admitted[i - 1].segment;
    if (prev.parent_id != s.parent_id) throw ValidationError("segments from different parent audios");
    if (prev.end > s.start) throw ValidationError("segments overlap or are out of time order");
  }

  std::vector<Chunk> chunks;
  for (const auto& [seg, text] : admitted) {
    bool joins = !chunks.empty() && seg.end - chunks.back().start <= max_chunk_len &&
                 seg.start - chunks.back().end <= gap_tol;
    if (!joins) chunks.push_back(Chunk{seg.parent_id, seg.start, seg.end, {}, {}});
    Chunk& c = chunks.back();
    c.end = seg.end;
    if (!c.members.empty()) c.transcript.push_back(' ');
    c.transcript += text;
    c.members.push_back({seg, text});
  }
  return chunks;
}

}  // namespace weaklabel
