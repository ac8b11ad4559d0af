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

// Perplexity scoring. LanguageModel is the pluggable role; NgramLM is the
// bundled add-k smoothed n-gram reference implementation.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "weaklabel/manifest.hpp"
#include "weaklabel/textmetrics.hpp"

namespace weaklabel {

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  /// exp of the mean negative log-probability per unit, end of text included.
  virtual double perplexity(std::string_view text) const = 0;
};

/// Assigns 1/V to every unit: perplexity is V for any text.
class UniformLM final : public LanguageModel {
 public:
  explicit UniformLM(double vocabulary_size) : v_(vocabulary_size) {
    if (!(v_ >= 1)) throw UsageError("uniform LM needs a vocabulary of at least one unit");
  }
  double perplexity(std::string_view) const override { return v_; }

 private:
  double v_;
};

class NgramLM final : public LanguageModel {
 public:
  static constexpr int kFormatVersion = 1;
  // Control-character prefix keeps special symbols disjoint from real text.
  inline static const std::string kBos = "\x02<s>";
  inline static const std::string kEos = "\x02</s>";
  inline static const std::string kUnk = "\x02<unk>";

  NgramLM(int order, double k, UnitKind unit_kind, NormalizationPolicy policy)
      : order_(order), k_(k), unit_kind_(unit_kind), policy_(policy) {
    if (order < 1) throw UsageError("n-gram order must be at least 1");
    if (!(k > 0) || !std::isfinite(k)) throw UsageError("add-k smoothing constant must be positive");
    vocab_ = {kBos, kEos, kUnk};
    for (int i = 0; i < 3; ++i) ids_.emplace(vocab_[i], i);
  }

  int order() const noexcept { return order_; }
  double k() const noexcept { return k_; }
  UnitKind unit_kind() const noexcept { return unit_kind_; }
  const NormalizationPolicy& policy() const noexcept { return policy_; }

  /// Every predictable symbol: the seen units plus end-of-text and unknown.
  std::vector<std::string> outcomes() const { return {vocab_.begin() + 1, vocab_.end()}; }
  std::size_t outcome_count() const noexcept { return vocab_.size() - 1; }

  void add_text(std::string_view text) {
    auto units = normalize(text, policy_, unit_kind_).units;
    std::vector<int> seq(order_ - 1, kBosId);
    for (const auto& u : units) seq.push_back(intern(u));
    seq.push_back(kEosId);
    for (std::size_t i = order_ - 1; i < seq.size(); ++i) {
      Context ctx(seq.begin() + (i - (order_ - 1)), seq.begin() + i);
      auto& row = counts_[ctx];
      ++row.total;
      ++row.next[seq[i]];
    }
  }

  /// P(next | context); `context` holds the order-1 preceding units (kBos for padding).
  double probability(const std::vector<std::string>& context, const std::string& next) const {
    if (static_cast<int>(context.size()) != order_ - 1) throw UsageError("context length must equal order - 1");
    Context ctx;
    for (const auto& c : context) ctx.push_back(lookup(c));
    return probability(ctx, lookup(next));
  }

  double perplexity(std::string_view text) const override {
    auto units = normalize(text, policy_, unit_kind_).units;
    if (units.empty()) throw UndefinedRateError("perplexity of empty text");
    Context ctx(order_ - 1, kBosId);
    double log_sum = 0;
    auto step = [&](int id) {
      log_sum += std::log(probability(ctx, id));
      if (!ctx.empty()) {
        ctx.erase(ctx.begin());
        ctx.push_back(id);
      }
    };
    for (const auto& u : units) step(lookup(u));
    step(kEosId);
    return std::exp(-log_sum / static_cast<double>(units.size() + 1));
  }

  Json to_json() const {
    Json counts = Json::array();
    for (const auto& [ctx, row] : counts_) {
      for (const auto& [next, n] : row.next) counts.push_back(Json::array({ctx, next, n}));
    }
    return Json{{"format", "weaklabel.ngram-lm"},
                {"version", kFormatVersion},
                {"order", order_},
                {"k", k_},
                {"unit_kind", std::string(weaklabel::to_string(unit_kind_))},
                {"normalization", weaklabel::to_json(policy_)},
                {"vocabulary", std::vector<std::string>(vocab_.begin() + 3, vocab_.end())},
                {"counts", std::move(counts)}};
  }

  static NgramLM from_json(const Json& j) {
    if (j.value("format", std::string{}) != "weaklabel.ngram-lm")
      throw ValidationError("not a weaklabel n-gram LM file");
    if (j.value("version", -1) != kFormatVersion)
      throw ValidationError("unsupported LM version " + j.value("version", Json(nullptr)).dump() +
                            " (expected " + std::to_string(kFormatVersion) + ")");
    NgramLM lm(detail::require(j, "order").get<int>(), detail::require(j, "k").get<double>(),
               parse_unit_kind(detail::require(j, "unit_kind").get<std::string>()),
               normalization_from_json(detail::require(j, "normalization")));
    for (const auto& u : detail::require(j, "vocabulary")) lm.intern(u.get<std::string>());
    const int n = static_cast<int>(lm.vocab_.size());
    for (const auto& e : detail::require(j, "counts")) {
      auto ctx = e.at(0).get<Context>();
      int next = e.at(1).get<int>();
      auto c = e.at(2).get<std::int64_t>();
      if (static_cast<int>(ctx.size()) != lm.order_ - 1 || next <= 0 || next >= n || c <= 0)
        throw ValidationError("malformed LM count entry " + e.dump());
      for (int id : ctx) {
        if (id < 0 || id >= n) throw ValidationError("malformed LM count entry " + e.dump());
      }
      auto& row = lm.counts_[ctx];
      row.total += c;
      row.next[next] += c;
    }
    return lm;
  }

  void save(const std::filesystem::path& path) const { save_json_file(to_json(), path); }
  static NgramLM load(const std::filesystem::path& path) { return from_json(load_json_file(path)); }

 private:
  using Context = std::vector<int>;
  struct Row {
    std::int64_t total = 0;
    std::map<int, std::int64_t> next;
  };
  static constexpr int kBosId = 0;
  static constexpr int kEosId = 1;
  static constexpr int kUnkId = 2;

  int intern(const std::string& unit) {
    auto [it, inserted] = ids_.emplace(unit, static_cast<int>(vocab_.size()));
    if (inserted) vocab_.push_back(unit);
    return it->second;
  }

  int lookup(const std::string& unit) const {
    auto it = ids_.find(unit);
    return it == ids_.end() ? kUnkId : it->second;
  }

  double probability(const Context& ctx, int next) const {
    const double v = static_cast<double>(outcome_count());
    auto it = counts_.find(ctx);
    if (it == counts_.end()) return 1.0 / v;
    auto n = it->second.next.find(next);
    double c = n == it->second.next.end() ? 0.0 : static_cast<double>(n->second);
    return (c + k_) / (static_cast<double>(it->second.total) + k_ * v);
  }

  int order_;
  double k_;
  UnitKind unit_kind_;
  NormalizationPolicy policy_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> ids_;
  std::map<Context, Row> counts_;
};

/// Counts every order-n window of every corpus string, with begin/end padding.
inline NgramLM train_ngram_lm(const std::vector<std::string>& corpus, int order, double k, UnitKind unit_kind,
                              const NormalizationPolicy& policy = NormalizationPolicy::agreement()) {
  if (corpus.empty()) throw UsageError("cannot train a language model on an empty corpus");
  NgramLM lm(order, k, unit_kind, policy);
  for (const auto& text : corpus) lm.add_text(text);
  return lm;
}

inline NgramLM train_char_lm(const std::vector<std::string>& corpus, int order = 3, double k = 1.0,
                             const NormalizationPolicy& policy = NormalizationPolicy::agreement()) {
  return train_ngram_lm(corpus, order, k, UnitKind::character, policy);
}

inline double perplexity(const LanguageModel& lm, std::string_view text) { return lm.perplexity(text); }

}  // namespace weaklabel
