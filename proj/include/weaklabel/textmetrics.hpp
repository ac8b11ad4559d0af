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

// Text normalization, Levenshtein distance, WER/CER, pairwise agreement and
// error-rate-reduction arithmetic. Every function here is pure.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <ranges>
#include <string>
#include <string_view>
#include <vector>

#include "weaklabel/error.hpp"
#include "weaklabel/unicode.hpp"

namespace weaklabel {

enum class UnitKind { word, character };

inline std::string_view to_string(UnitKind kind) {
  return kind == UnitKind::word ? "word" : "character";
}

inline UnitKind parse_unit_kind(std::string_view s) {
  if (s == "word") return UnitKind::word;
  if (s == "character" || s == "char") return UnitKind::character;
  throw UsageError("unknown unit kind '" + std::string(s) + "'");
}

struct NormalizationPolicy {
  bool strip_diacritics = false;
  bool fold_characters = false;
  bool collapse_whitespace = true;
  bool remove_punctuation = true;

  /// Used for hypothesis agreement: diacritic disagreements stay visible.
  static constexpr NormalizationPolicy agreement() { return {}; }
  /// Used for leaderboard-style scoring.
  static constexpr NormalizationPolicy strict() { return {true, true, true, true}; }
  static constexpr NormalizationPolicy identity() { return {false, false, false, false}; }

  friend bool operator==(const NormalizationPolicy&, const NormalizationPolicy&) = default;
};

struct TokenSequence {
  std::vector<std::string> units;
  UnitKind unit_kind = UnitKind::word;

  std::size_t size() const noexcept { return units.size(); }
  bool empty() const noexcept { return units.empty(); }

  /// Units joined by a single space (word mode) or concatenated (character mode).
  std::string joined() const {
    std::string out;
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (i && unit_kind == UnitKind::word) out.push_back(' ');
      out += units[i];
    }
    return out;
  }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Applies `policy` to `text`. Punctuation becomes a space so "a,b" stays two words.
inline std::string normalize_text(std::string_view text, const NormalizationPolicy& policy) {
  std::u32string in = unicode::decode_utf8(text);
  std::u32string out;
  out.reserve(in.size());
  for (char32_t cp : in) {
    if (policy.fold_characters) {
      if (unicode::is_tatweel(cp)) continue;
      cp = unicode::fold_letter(cp);
    }
    if (policy.strip_diacritics && unicode::is_combining_mark(cp)) continue;
    if (policy.remove_punctuation && unicode::is_punctuation(cp)) cp = U' ';
    out.push_back(cp);
  }
  if (policy.collapse_whitespace) {
    std::u32string collapsed;
    collapsed.reserve(out.size());
    bool pending_space = false;
    for (char32_t cp : out) {
      if (unicode::is_whitespace(cp)) {
        pending_space = !collapsed.empty();
        continue;
      }
      if (pending_space) collapsed.push_back(U' ');
      pending_space = false;
      collapsed.push_back(cp);
    }
    out = std::move(collapsed);
  }
  return unicode::encode_utf8(out);
}

/// Word mode splits on whitespace; character mode yields one unit per scalar value,
/// whitespace excluded.
inline TokenSequence normalize(std::string_view text, const NormalizationPolicy& policy,
                               UnitKind kind) {
  TokenSequence seq{{}, kind};
  std::u32string cps = unicode::decode_utf8(normalize_text(text, policy));
  if (kind == UnitKind::character) {
    for (char32_t cp : cps) {
      if (unicode::is_whitespace(cp)) continue;
      std::string unit;
      unicode::append_utf8(unit, cp);
      seq.units.push_back(std::move(unit));
    }
    return seq;
  }
  std::string current;
  for (char32_t cp : cps) {
    if (unicode::is_whitespace(cp)) {
      if (!current.empty()) seq.units.push_back(std::move(current));
      current.clear();
    } else {
      unicode::append_utf8(current, cp);
    }
  }
  if (!current.empty()) seq.units.push_back(std::move(current));
  return seq;
}

namespace detail {
__extension__ typedef __int128 Wide;
}  // namespace detail

/// Non-negative fraction kept in lowest terms. Error ratios stay exact until reported.
class Ratio {
  using Wide = detail::Wide;

 public:
  constexpr Ratio() = default;
  Ratio(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den <= 0) throw UndefinedRateError("ratio with non-positive denominator");
    reduce();
  }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Strict comparison against a decimal threshold. The quotient is correctly
  /// rounded, so a ratio equal to the decimal (7/20 vs 0.35) never exceeds it.
  bool exceeds(double threshold) const noexcept { return value() > threshold; }

  friend Ratio operator+(const Ratio& a, const Ratio& b) {
    Wide n = static_cast<Wide>(a.num_) * b.den_ + static_cast<Wide>(b.num_) * a.den_;
    Wide d = static_cast<Wide>(a.den_) * b.den_;
    return from_wide(n, d);
  }

  Ratio divided_by(std::int64_t count) const {
    if (count <= 0) throw UndefinedRateError("mean over zero terms");
    return from_wide(num_, static_cast<Wide>(den_) * count);
  }

  friend bool operator==(const Ratio& a, const Ratio& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) noexcept {
    return static_cast<Wide>(a.num_) * b.den_ <=> static_cast<Wide>(b.num_) * a.den_;
  }
  friend std::ostream& operator<<(std::ostream& os, const Ratio& r) {
    return os << r.num_ << '/' << r.den_;
  }

 private:
  static Ratio from_wide(Wide n, Wide d) {
    Wide a = n < 0 ? -n : n, b = d;
    while (b) {
      Wide t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) n /= a, d /= a;
    constexpr Wide kMax = INT64_MAX;
    if (n > kMax || d > kMax) throw UsageError("ratio overflow");
    Ratio r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  void reduce() {
    std::int64_t g = std::gcd(num_, den_);
    if (g > 1) num_ /= g, den_ /= g;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Levenshtein distance with unit costs over any two random-access ranges.
template <std::ranges::random_access_range A, std::ranges::random_access_range B>
std::size_t edit_distance(const A& a, const B& b) {
  const std::size_t n = std::ranges::size(a), m = std::ranges::size(b);
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  auto ai = std::ranges::begin(a);
  auto bi = std::ranges::begin(b);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (ai[i - 1] == bi[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

inline std::size_t levenshtein(const TokenSequence& a, const TokenSequence& b) {
  if (a.unit_kind != b.unit_kind) throw UsageError("levenshtein over mismatched unit kinds");
  return edit_distance(a.units, b.units);
}

/// levenshtein(reference, hypothesis) / |reference|. WER in word mode, CER in character mode.
inline Ratio error_rate(const TokenSequence& reference, const TokenSequence& hypothesis) {
  if (reference.empty()) throw UndefinedRateError("error rate over an empty reference");
  return Ratio(static_cast<std::int64_t>(levenshtein(reference, hypothesis)),
               static_cast<std::int64_t>(reference.size()));
}

inline Ratio error_rate(std::string_view reference, std::string_view hypothesis, UnitKind kind,
                        const NormalizationPolicy& policy = NormalizationPolicy::agreement()) {
  return error_rate(normalize(reference, policy, kind), normalize(hypothesis, policy, kind));
}

struct PairwiseError {
  Ratio mean;
  std::size_t pair_count = 0;
};

/// Mean error_rate(h_i, h_j) over ordered pairs i != j. Pairs whose reference is
/// empty are skipped and not counted; if every pair is skipped the mean is 0.
inline PairwiseError avg_pairwise_error(const std::vector<TokenSequence>& hypotheses) {
  if (hypotheses.size() < 2) throw UsageError("pairwise error needs at least two hypotheses");
  Ratio sum;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (hypotheses[i].empty()) continue;
    for (std::size_t j = 0; j < hypotheses.size(); ++j) {
      if (i == j) continue;
      sum = sum + error_rate(hypotheses[i], hypotheses[j]);
      ++pairs;
    }
  }
  if (pairs == 0) return {};
  return {sum.divided_by(static_cast<std::int64_t>(pairs)), pairs};
}

inline PairwiseError avg_pairwise_error(const std::vector<std::string>& texts, UnitKind kind,
                                        const NormalizationPolicy& policy) {
  std::vector<TokenSequence> seqs;
  seqs.reserve(texts.size());
  for (const auto& t : texts) seqs.push_back(normalize(t, policy, kind));
  return avg_pairwise_error(seqs);
}

struct AgreementStats {
  Ratio avg_pairwise_wer;
  Ratio avg_pairwise_cer;
  std::size_t pair_count = 0;

  friend bool operator==(const AgreementStats&, const AgreementStats&) = default;
};

inline AgreementStats agreement_stats(const std::vector<std::string>& texts,
                                      const NormalizationPolicy& policy) {
  auto words = avg_pairwise_error(texts, UnitKind::word, policy);
  auto chars = avg_pairwise_error(texts, UnitKind::character, policy);
  return {words.mean, chars.mean, words.pair_count};
}

/// Relative reduction in percent: 100 * (baseline - ours) / baseline.
inline double rate_reduction(double baseline, double ours) {
  if (baseline == 0.0) throw UndefinedRateError("rate reduction against a zero baseline");
  return 100.0 * (baseline - ours) / baseline;
}

/// Rounds half away from zero at `decimals` places. Values within 1e-9 of a tie
/// count as the tie, so 41.365 stored as 41.36499... still rounds up.
inline double round_half_up(double value, int decimals = 2) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = std::abs(value) * scale;
  double rounded = std::floor(scaled + 0.5 + 1e-9);
  if (rounded == 0.0) return 0.0;
  return std::copysign(rounded / scale, value);
}

}  // namespace weaklabel
