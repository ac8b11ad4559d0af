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

// Hypothesis generators: the common contract, transcript sources, file replay
// and the seeded corruption model used as a noisy test double.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "weaklabel/datamodel.hpp"
#include "weaklabel/manifest.hpp"

namespace weaklabel {

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

/// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t stable_hash(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// mt19937_64 plus distribution code that does not depend on the standard
/// library's (unspecified) distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(index(static_cast<std::size_t>(hi - lo + 1)));
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Corruption model
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& default_word_alphabet() {
  static const std::vector<std::string> kWords = {
      "في", "من", "على", "إلى", "هذا", "كان", "قال", "بين", "عند", "ذلك",
      "لكن", "حتى", "بعد", "قبل", "كل", "هناك",
  };
  return kWords;
}

inline const std::vector<std::string>& default_char_alphabet() {
  static const std::vector<std::string> kChars = {
      "ا", "ب", "ت", "ث", "ج", "ح", "خ", "د", "ذ", "ر", "ز", "س", "ش", "ص",
      "ض", "ط", "ظ", "ع", "غ", "ف", "ق", "ك", "ل", "م", "ن", "ه", "و", "ي",
  };
  return kChars;
}

struct CorruptionModel {
  double sub_rate = 0;
  double ins_rate = 0;
  double del_rate = 0;
  UnitKind unit_kind = UnitKind::word;
  std::uint64_t seed = 0;
  /// Replacement and insertion units; empty selects the default alphabet for unit_kind.
  std::vector<std::string> alphabet;

  const std::vector<std::string>& units() const {
    if (!alphabet.empty()) return alphabet;
    return unit_kind == UnitKind::word ? default_word_alphabet() : default_char_alphabet();
  }

  friend bool operator==(const CorruptionModel&, const CorruptionModel&) = default;
};

inline void validate(const CorruptionModel& m) {
  for (double r : {m.sub_rate, m.ins_rate, m.del_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("corruption rates must lie in [0, 1]");
  }
  if (m.sub_rate + m.del_rate > 1.0) throw ValidationError("sub_rate + del_rate must not exceed 1");
  if (m.units().size() < 2) throw ValidationError("corruption alphabet needs at least two units");
}

/// Per unit: delete with del_rate, else substitute with sub_rate (by a different
/// alphabet unit), else keep; then insert a random unit with ins_rate.
inline TokenSequence corrupt(const TokenSequence& reference, const CorruptionModel& model, Rng& rng) {
  validate(model);
  const auto& alphabet = model.units();
  TokenSequence out{{}, reference.unit_kind};
  out.units.reserve(reference.size());
  for (const auto& unit : reference.units) {
    double u = rng.uniform();
    if (u < model.del_rate) {
      // dropped
    } else if (u < model.del_rate + model.sub_rate) {
      std::size_t pick = rng.index(alphabet.size());
      while (alphabet[pick] == unit) pick = rng.index(alphabet.size());
      out.units.push_back(alphabet[pick]);
    } else {
      out.units.push_back(unit);
    }
    if (rng.bernoulli(model.ins_rate)) out.units.push_back(alphabet[rng.index(alphabet.size())]);
  }
  return out;
}

inline TokenSequence corrupt(const TokenSequence& reference, const CorruptionModel& model) {
  Rng rng(model.seed);
  return corrupt(reference, model, rng);
}

/// Corrupts raw text. Character models work word by word so spacing survives.
inline std::string corrupt_text(std::string_view text, const CorruptionModel& model, Rng& rng) {
  const auto policy = NormalizationPolicy::identity();
  TokenSequence words = normalize(text, policy, UnitKind::word);
  if (model.unit_kind == UnitKind::word) return corrupt(words, model, rng).joined();
  std::string out;
  for (const auto& w : words.units) {
    std::string piece = corrupt(normalize(w, policy, UnitKind::character), model, rng).joined();
    if (piece.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += piece;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transcript sources
// ---------------------------------------------------------------------------

/// Text for a segment, or nullopt when the source knows nothing about it.
class TranscriptSource {
 public:
  virtual ~TranscriptSource() = default;
  virtual std::optional<std::string> lookup(const Segment& segment) const = 0;
};

struct TimedText {
  std::string parent_id;
  Millis start{0};
  Millis end{0};
  std::string text;
};

inline TimedText timed_text_from_json(const Json& j) {
  TimedText t;
  t.parent_id = detail::require(j, "parent_id").get<std::string>();
  t.start = seconds_from_json(detail::require(j, "start"));
  t.end = seconds_from_json(detail::require(j, "end"));
  t.text = detail::require(j, "text").get<std::string>();
  if (t.start >= t.end) throw ValidationError("transcript entry has start >= end");
  return t;
}

inline Json to_json(const TimedText& t) {
  return Json{{"parent_id", t.parent_id},
              {"start", seconds_json(t.start)},
              {"end", seconds_json(t.end)},
              {"text", t.text}};
}

inline std::vector<TimedText> read_timed_texts(const std::filesystem::path& path) {
  std::vector<TimedText> out;
  for_each_jsonl(path, [&](std::size_t, const Json& j) { out.push_back(timed_text_from_json(j)); });
  return out;
}

/// Exact (parent_id, start, end) lookup: the replay transcript file.
class IntervalTranscripts final : public TranscriptSource {
 public:
  IntervalTranscripts() = default;
  explicit IntervalTranscripts(const std::vector<TimedText>& entries) {
    for (const auto& e : entries) add(e);
  }

  void add(const TimedText& e) {
    if (!table_.emplace(std::tuple{e.parent_id, e.start.count(), e.end.count()}, e.text).second)
      throw ValidationError("duplicate transcript for " + e.parent_id + " [" +
                            std::to_string(e.start.count()) + ", " + std::to_string(e.end.count()) + "] ms");
  }

  std::optional<std::string> lookup(const Segment& s) const override {
    auto it = table_.find(std::tuple{s.parent_id, s.start.count(), s.end.count()});
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::map<std::tuple<std::string, std::int64_t, std::int64_t>, std::string> table_;
};

/// Time-aligned words: a segment's text is every entry whose midpoint falls in
/// [start, end), in time order. Works for any segmentation of the audio.
class TimedWords final : public TranscriptSource {
 public:
  TimedWords() = default;
  explicit TimedWords(std::vector<TimedText> entries) {
    for (auto& e : entries) by_parent_[e.parent_id].push_back(std::move(e));
    for (auto& [_, v] : by_parent_) {
      std::stable_sort(v.begin(), v.end(), [](const TimedText& a, const TimedText& b) {
        return midpoint2(a) < midpoint2(b);
      });
    }
  }

  std::optional<std::string> lookup(const Segment& s) const override {
    auto it = by_parent_.find(s.parent_id);
    if (it == by_parent_.end()) return std::nullopt;
    const auto& v = it->second;
    auto lo = std::lower_bound(v.begin(), v.end(), 2 * s.start.count(),
                               [](const TimedText& t, std::int64_t m) { return midpoint2(t) < m; });
    std::string out;
    for (; lo != v.end() && midpoint2(*lo) < 2 * s.end.count(); ++lo) {
      if (!out.empty()) out.push_back(' ');
      out += lo->text;
    }
    return out;
  }

 private:
  static std::int64_t midpoint2(const TimedText& t) { return t.start.count() + t.end.count(); }

  std::map<std::string, std::vector<TimedText>> by_parent_;
};

enum class LookupMode { interval, timed_words };

inline std::shared_ptr<const TranscriptSource> load_transcript_source(const std::filesystem::path& path,
                                                                      LookupMode mode) {
  auto entries = read_timed_texts(path);
  if (mode == LookupMode::interval) return std::make_shared<IntervalTranscripts>(entries);
  return std::make_shared<TimedWords>(std::move(entries));
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// One hypothesis per segment. Implementations are safe for concurrent calls.
class HypothesisGenerator {
 public:
  explicit HypothesisGenerator(std::string id) : id_(std::move(id)) {}
  virtual ~HypothesisGenerator() = default;

  const std::string& id() const noexcept { return id_; }

  /// `audio_uri` locates the parent audio for backends that need the samples.
  virtual Hypothesis generate(const Segment& segment, std::string_view audio_uri = {}) const = 0;

 private:
  std::string id_;
};

class FileReplayGenerator final : public HypothesisGenerator {
 public:
  FileReplayGenerator(std::string id, std::shared_ptr<const TranscriptSource> source)
      : HypothesisGenerator(std::move(id)), source_(std::move(source)) {}

  Hypothesis generate(const Segment& s, std::string_view = {}) const override {
    auto text = source_->lookup(s);
    if (!text)
      throw GeneratorMiss("generator '" + id() + "' has no transcript for " + s.parent_id + " [" +
                          std::to_string(to_seconds(s.start)) + ", " + std::to_string(to_seconds(s.end)) + "]");
    return {id(), std::move(*text)};
  }

 private:
  std::shared_ptr<const TranscriptSource> source_;
};

/// Corrupts a ground-truth transcript. The random stream is seeded from the model
/// seed, the generator id and the segment, so output is independent of call order.
class MockNoisyGenerator final : public HypothesisGenerator {
 public:
  MockNoisyGenerator(std::string id, CorruptionModel model, std::shared_ptr<const TranscriptSource> truth)
      : HypothesisGenerator(std::move(id)), model_(std::move(model)), truth_(std::move(truth)) {
    validate(model_);
  }

  Hypothesis generate(const Segment& s, std::string_view = {}) const override {
    auto text = truth_->lookup(s);
    if (!text) throw GeneratorMiss("generator '" + id() + "' has no reference for " + s.parent_id);
    if (model_.sub_rate == 0 && model_.ins_rate == 0 && model_.del_rate == 0) return {id(), std::move(*text)};
    std::uint64_t h = stable_hash(id(), splitmix64(model_.seed));
    h = stable_hash(s.parent_id, h);
    h = splitmix64(h ^ static_cast<std::uint64_t>(s.start.count()));
    h = splitmix64(h ^ static_cast<std::uint64_t>(s.end.count()));
    Rng rng(h);
    return {id(), corrupt_text(*text, model_, rng)};
  }

  const CorruptionModel& model() const noexcept { return model_; }

 private:
  CorruptionModel model_;
  std::shared_ptr<const TranscriptSource> truth_;
};

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

struct FileReplaySettings {
  std::filesystem::path path;
  LookupMode mode = LookupMode::interval;
};

struct MockNoisySettings {
  CorruptionModel model;
  /// Ground-truth transcripts the mock corrupts.
  std::filesystem::path reference;
  LookupMode mode = LookupMode::timed_words;
};

struct HttpSettings {
  std::string endpoint;
  std::string auth_token;
  Millis timeout{30000};
  std::size_t max_in_flight = 4;
  int retries = 3;
  Millis initial_backoff{200};
};

enum class GeneratorKind { file_replay, mock_noisy, http };

struct GeneratorSpec {
  std::string generator_id;
  std::variant<FileReplaySettings, MockNoisySettings, HttpSettings> settings;

  GeneratorKind kind() const noexcept { return static_cast<GeneratorKind>(settings.index()); }
};

inline std::string_view to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::file_replay: return "file_replay";
    case GeneratorKind::mock_noisy: return "mock_noisy";
    case GeneratorKind::http: return "http";
  }
  return "?";
}

inline LookupMode parse_lookup_mode(const std::string& s) {
  if (s == "interval") return LookupMode::interval;
  if (s == "timed_words") return LookupMode::timed_words;
  throw ValidationError("unknown lookup mode '" + s + "'");
}

/// Relative paths resolve against `base_dir`.
inline GeneratorSpec generator_spec_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  GeneratorSpec spec;
  spec.generator_id = detail::require(j, "generator_id").get<std::string>();
  if (spec.generator_id.empty()) throw ValidationError("generator_id must be non-empty");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  const auto kind = detail::require(j, "kind").get<std::string>();
  if (kind == "file_replay") {
    FileReplaySettings s;
    s.path = resolve(detail::require(j, "path").get<std::string>());
    s.mode = parse_lookup_mode(j.value("lookup", std::string("interval")));
    spec.settings = s;
  } else if (kind == "mock_noisy") {
    MockNoisySettings s;
    s.model.sub_rate = j.value("sub_rate", 0.0);
    s.model.ins_rate = j.value("ins_rate", 0.0);
    s.model.del_rate = j.value("del_rate", 0.0);
    s.model.seed = j.value("seed", std::uint64_t{0});
    s.model.unit_kind = parse_unit_kind(j.value("unit_kind", std::string("word")));
    if (j.contains("alphabet")) s.model.alphabet = j["alphabet"].get<std::vector<std::string>>();
    validate(s.model);
    s.reference = resolve(detail::require(j, "reference").get<std::string>());
    s.mode = parse_lookup_mode(j.value("lookup", std::string("timed_words")));
    spec.settings = s;
  } else if (kind == "http") {
    HttpSettings s;
    s.endpoint = detail::require(j, "endpoint").get<std::string>();
    s.auth_token = j.value("auth_token", std::string{});
    s.timeout = from_seconds(j.value("timeout", 30.0));
    s.max_in_flight = j.value("max_in_flight", std::size_t{4});
    s.retries = j.value("retries", 3);
    s.initial_backoff = from_seconds(j.value("initial_backoff", 0.2));
    if (s.max_in_flight == 0) throw ValidationError("max_in_flight must be positive");
    if (s.retries < 0) throw ValidationError("retries must be non-negative");
    spec.settings = s;
  } else {
    throw ValidationError("unknown generator kind '" + kind + "'");
  }
  return spec;
}

/// A JSON array of generator specs.
inline std::vector<GeneratorSpec> load_generator_specs(const std::filesystem::path& path) {
  Json j = load_json_file(path);
  if (!j.is_array()) throw ValidationError("generator file must hold a JSON array");
  std::vector<GeneratorSpec> specs;
  std::set<std::string> ids;
  for (const auto& item : j) {
    specs.push_back(generator_spec_from_json(item, path.parent_path()));
    if (!ids.insert(specs.back().generator_id).second)
      throw ValidationError("duplicate generator_id '" + specs.back().generator_id + "'");
  }
  return specs;
}

}  // namespace weaklabel
