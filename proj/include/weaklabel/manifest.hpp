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

// JSONL manifests: one record per line, UTF-8, stable field order.

#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "weaklabel/serialization.hpp"

namespace weaklabel {

using ManifestRecord = std::variant<Chunk, SelectionResult>;

inline Json record_to_json(const ManifestRecord& r) {
  return std::visit([](const auto& v) { return to_json(v); }, r);
}

inline ManifestRecord record_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("manifest record must be a JSON object");
  if (j.contains("segment")) return selection_from_json(j);
  if (j.contains("segments")) return chunk_from_json(j);
  throw ValidationError("record is neither a chunk nor a selection result");
}

/// Config-dependent checks: admitted segments and chunks respect the length caps.
inline void validate_against(const ManifestRecord& r, const PipelineConfig& limits) {
  if (const auto* sel = std::get_if<SelectionResult>(&r)) {
    if (sel->decision == Decision::admitted && sel->segment.duration() > limits.max_segment_len)
      throw ValidationError("admitted segment longer than max_segment_len");
  } else {
    const auto& c = std::get<Chunk>(r);
    if (c.span() > limits.max_chunk_len) throw ValidationError("chunk longer than max_chunk_len");
    for (const auto& m : c.members) {
      if (m.segment.duration() > limits.max_segment_len)
        throw ValidationError("chunk member longer than max_segment_len");
    }
  }
}

inline void validate_record(const ManifestRecord& r) {
  // Round-tripping through JSON applies every reader-side check.
  (void)record_from_json(record_to_json(r));
}

/// Single-writer JSONL appender.
class ManifestWriter {
 public:
  explicit ManifestWriter(const std::filesystem::path& path, bool append = false)
      : path_(path), out_(path, append ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  }

  void write(const ManifestRecord& r) {
    Json j = record_to_json(r);
    (void)record_from_json(j);
    write_json(j);
  }

  void write_json(const Json& j) {
    out_ << j.dump() << '\n';
    if (!out_) throw IoError("write to '" + path_.string() + "' failed");
  }

  void flush() {
    out_.flush();
    if (!out_) throw IoError("flush of '" + path_.string() + "' failed");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

template <typename Record>
void write_manifest(std::span<const Record> records, const std::filesystem::path& path) {
  ManifestWriter w(path);
  for (const auto& r : records) w.write(ManifestRecord{r});
  w.flush();
}

template <typename Record>
void write_manifest(const std::vector<Record>& records, const std::filesystem::path& path) {
  write_manifest(std::span<const Record>(records), path);
}

struct ManifestDiagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ManifestReadResult {
  std::vector<ManifestRecord> records;
  std::vector<ManifestDiagnostic> diagnostics;

  bool ok() const noexcept { return diagnostics.empty(); }
};

/// Calls `fn(line_number, json)` for every non-blank line. Parse failures go to
/// `on_error` and reading continues.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(std::size_t, const Json&)>& fn,
                           const std::function<void(std::size_t, const std::string&)>& on_error) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      on_error(n, std::string("malformed JSON: ") + e.what());
      continue;
    }
    try {
      fn(n, j);
    } catch (const nlohmann::json::exception& e) {
      on_error(n, e.what());
    } catch (const Error& e) {
      on_error(n, e.what());
    }
  }
}

/// Strict variant: the first bad line throws ParseError.
inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(std::size_t, const Json&)>& fn) {
  for_each_jsonl(path, fn, [](std::size_t line, const std::string& msg) {
    throw ParseError(line, msg);
  });
}

/// Reads every valid record; invalid lines become line-numbered diagnostics.
inline ManifestReadResult read_manifest(const std::filesystem::path& path,
                                        const PipelineConfig* limits = nullptr) {
  ManifestReadResult result;
  for_each_jsonl(
      path,
      [&](std::size_t, const Json& j) {
        ManifestRecord r = record_from_json(j);
        if (limits) validate_against(r, *limits);
        result.records.push_back(std::move(r));
      },
      [&](std::size_t line, const std::string& msg) { result.diagnostics.push_back({line, msg}); });
  return result;
}

/// Like read_manifest, but throws ParseError naming the first bad line.
inline std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path,
                                                 const PipelineConfig* limits = nullptr) {
  auto r = read_manifest(path, limits);
  if (!r.ok()) throw ParseError(r.diagnostics.front().line, r.diagnostics.front().message);
  return std::move(r.records);
}

inline Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

inline void save_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  return config_from_json(load_json_file(path));
}

inline void save_config(const PipelineConfig& c, const std::filesystem::path& path) {
  save_json_file(to_json(c), path);
}

}  // namespace weaklabel
