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

#include <memory>
#include <vector>

#include "weaklabel/generators.hpp"
#include "weaklabel/http_generator.hpp"

namespace weaklabel {

inline std::shared_ptr<const HypothesisGenerator> make_generator(const GeneratorSpec& spec) {
  return std::visit(
      [&](const auto& s) -> std::shared_ptr<const HypothesisGenerator> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FileReplaySettings>) {
          return std::make_shared<FileReplayGenerator>(spec.generator_id, load_transcript_source(s.path, s.mode));
        } else if constexpr (std::is_same_v<T, MockNoisySettings>) {
          return std::make_shared<MockNoisyGenerator>(spec.generator_id, s.model,
                                                      load_transcript_source(s.reference, s.mode));
        } else {
          return std::make_shared<HttpGenerator>(spec.generator_id, s);
        }
      },
      spec.settings);
}

inline std::vector<std::shared_ptr<const HypothesisGenerator>> make_generators(
    const std::vector<GeneratorSpec>& specs) {
  std::vector<std::shared_ptr<const HypothesisGenerator>> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.push_back(make_generator(s));
  return out;
}

}  // namespace weaklabel
