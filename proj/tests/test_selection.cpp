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


#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support/oracles.hpp"

using namespace weaklabel;

namespace {

HypothesisSet hyps(std::initializer_list<std::pair<const char*, const char*>> items) {
  HypothesisSet out;
  for (auto [id, text] : items) out.push_back({id, text});
  return out;
}

PipelineConfig thresholds(double pwer, double pcer) {
  PipelineConfig c;
  c.pwer_threshold = pwer;
  c.pcer_threshold = pcer;
  return c;
}

}  // namespace

TEST(SelectHypothesis, MajorityWins) {
  auto h = hyps({{"g1", "the cat sat"}, {"g2", "the cat sat"}, {"g3", "a dog ran"}});
  EXPECT_EQ(select_hypothesis(h).generator_id, "g1");
  EXPECT_EQ(select_hypothesis(h).text, "the cat sat");
}

TEST(SelectHypothesis, CharacterDistanceBreaksWordTies) {
  // Both candidates are one word off each other; "cat" is closer to "cats" in characters.
  auto h = hyps({{"g1", "dog"}, {"g2", "cat"}, {"g3", "cats"}});
  auto s = medoid_scores(h, UnitKind::word, NormalizationPolicy::agreement());
  EXPECT_EQ(s.primary, (std::vector<std::size_t>{2, 2, 2}));
  EXPECT_EQ(select_hypothesis(h).generator_id, "g2");
}

TEST(SelectHypothesis, GeneratorIdBreaksFullTies) {
  auto h = hyps({{"zeta", "x y"}, {"alpha", "x z"}});
  EXPECT_EQ(select_hypothesis(h).generator_id, "alpha");
  std::reverse(h.begin(), h.end());
  EXPECT_EQ(select_hypothesis(h).generator_id, "alpha");
}

TEST(SelectHypothesis, NeedsTwo) {
  EXPECT_THROW(select_hypothesis(hyps({{"g1", "x"}})), UsageError);
}

TEST(SelectHypothesisProperty, MatchesBruteForceMedoid) {
  oracle::TextGen g(31);
  for (int trial = 0; trial < 2000; ++trial) {
    HypothesisSet h;
    const auto n = g.between(2, 6);
    for (int i = 0; i < n; ++i) h.push_back({"g" + std::to_string(g.between(0, 99)) + "_" + std::to_string(i), g.words(4, 6)});
    ASSERT_EQ(select_hypothesis_index(h), oracle::medoid(h)) << "trial " << trial;
  }
}

TEST(SelectHypothesisProperty, PermutationInvariant) {
  oracle::TextGen g(32);
  for (int trial = 0; trial < 500; ++trial) {
    HypothesisSet h;
    const auto n = g.between(2, 6);
    for (int i = 0; i < n; ++i) h.push_back({"g" + std::to_string(i), g.words(3, 5)});
    auto chosen = select_hypothesis(h);
    std::shuffle(h.begin(), h.end(), g.engine());
    ASSERT_EQ(select_hypothesis(h), chosen);
  }
}

TEST(AgreementGate, IdenticalHypothesesAdmitted) {
  auto v = admit_by_agreement(hyps({{"a", "x y z"}, {"b", "x y z"}, {"c", "x y z"}}), PipelineConfig{});
  EXPECT_EQ(v.decision, Decision::admitted);
  EXPECT_EQ(v.stats.avg_pairwise_wer, Ratio(0, 1));
  EXPECT_EQ(v.stats.pair_count, 6u);
}

TEST(AgreementGate, EqualToThresholdIsAdmitted) {
  // Two hypotheses, one substitution in four words: pairwise WER 1/4 both ways.
  auto h = hyps({{"a", "a b c d"}, {"b", "a b x d"}});
  EXPECT_EQ(admit_by_agreement(h, thresholds(0.25, 1.0)).decision, Decision::admitted);
  EXPECT_EQ(admit_by_agreement(h, thresholds(0.24, 1.0)).decision, Decision::dropped_agreement);
}

TEST(AgreementGate, DecimalBoundaryIsExact) {
  // 7 substitutions out of 20 words: pairwise WER 7/20 = 0.35 exactly.
  std::string ref, hyp;
  for (int i = 0; i < 20; ++i) {
    ref += (i ? " w" : "w") + std::to_string(i);
    hyp += (i ? " " : "") + (i < 7 ? "v" + std::to_string(i) : "w" + std::to_string(i));
  }
  HypothesisSet h{{"a", ref}, {"b", hyp}};
  auto v = admit_by_agreement(h, thresholds(0.35, 1.0));
  EXPECT_EQ(v.stats.avg_pairwise_wer, Ratio(7, 20));
  EXPECT_EQ(v.decision, Decision::admitted);
}

TEST(AgreementGate, CerAloneCanDrop) {
  auto h = hyps({{"a", "abcdefgh"}, {"b", "abcdxxxx"}});
  EXPECT_EQ(admit_by_agreement(h, thresholds(1.0, 0.15)).decision, Decision::dropped_agreement);
  EXPECT_EQ(admit_by_agreement(h, thresholds(1.0, 0.5)).decision, Decision::admitted);
}

TEST(AgreementGate, AllEmptyIsDropped) {
  EXPECT_EQ(admit_by_agreement(hyps({{"a", ""}, {"b", " ,"}}), PipelineConfig{}).decision, Decision::dropped_agreement);
}

TEST(AgreementGateProperty, MonotoneInThreshold) {
  oracle::TextGen g(33);
  for (int trial = 0; trial < 500; ++trial) {
    HypothesisSet h;
    for (int i = 0; i < 3; ++i) h.push_back({"g" + std::to_string(i), g.words(3, 6) + " q"});
    double lo = g.uniform(), hi = lo + g.uniform();
    bool admitted_lo = admit_by_agreement(h, thresholds(lo, 10)).decision == Decision::admitted;
    bool admitted_hi = admit_by_agreement(h, thresholds(hi, 10)).decision == Decision::admitted;
    ASSERT_TRUE(!admitted_lo || admitted_hi);
  }
}

TEST(PerplexityGate, InfiniteThresholdSkipsScoring) {
  UniformLM lm(1e9);
  auto v = admit_by_perplexity({"g", "anything"}, lm, std::numeric_limits<double>::infinity());
  EXPECT_EQ(v.decision, Decision::admitted);
  EXPECT_FALSE(v.perplexity.has_value());
  EXPECT_EQ(admit_by_perplexity({"g", "x"}, nullptr, 10.0).decision, Decision::admitted);
}

TEST(PerplexityGate, StrictComparison) {
  UniformLM lm(50);
  EXPECT_EQ(admit_by_perplexity({"g", "x"}, lm, 50.0).decision, Decision::admitted);
  auto v = admit_by_perplexity({"g", "x"}, lm, 49.9);
  EXPECT_EQ(v.decision, Decision::dropped_perplexity);
  EXPECT_EQ(v.perplexity, 50.0);
}

TEST(PerplexityGate, UnscorableTextDropped) {
  auto lm = train_char_lm({"abc"});
  auto v = admit_by_perplexity({"g", " ... "}, lm, 100.0);
  EXPECT_EQ(v.decision, Decision::dropped_perplexity);
  EXPECT_FALSE(v.perplexity.has_value());
}

TEST(NgramLM, UnigramHandComputed) {
  // Trained on "ab": counts a=1, b=1, end=1 over 4 outcomes (a, b, end, unknown).
  // Add-one gives 2/7 for each seen symbol, so PPL("ab") = 7/2.
  auto lm = train_ngram_lm({"ab"}, 1, 1.0, UnitKind::character);
  EXPECT_EQ(lm.outcome_count(), 4u);
  EXPECT_NEAR(lm.perplexity("ab"), 3.5, 1e-12);
  // "c" is unknown: P(unk) = 1/7, P(end) = 2/7.
  EXPECT_NEAR(lm.perplexity("c"), std::exp(-(std::log(1.0 / 7) + std::log(2.0 / 7)) / 2), 1e-12);
}

TEST(NgramLM, ConditionalDistributionsSumToOne) {
  auto lm = train_ngram_lm({"abcab", "bca", "cab"}, 3, 0.5, UnitKind::character);
  std::vector<std::string> syms = {NgramLM::kBos, "a", "b", "c", NgramLM::kUnk};
  for (const auto& c1 : syms) {
    for (const auto& c2 : syms) {
      double total = 0;
      for (const auto& next : lm.outcomes()) total += lm.probability({c1, c2}, next);
      EXPECT_NEAR(total, 1.0, 1e-9) << c1 << "," << c2;
    }
  }
}

TEST(NgramLM, InDomainTextScoresLower) {
  oracle::TextGen g(34);
  std::vector<std::string> train;
  for (int i = 0; i < 300; ++i) train.push_back("the cat sat on the mat");
  auto lm = train_char_lm(train);
  double in_domain = lm.perplexity("the cat sat on the mat");
  double noise = lm.perplexity("zqxj vkwp yyfh");
  EXPECT_LT(in_domain * 5, noise);
}

TEST(NgramLM, JsonRoundTripPreservesScores) {
  oracle::TempDir dir;
  auto lm = train_ngram_lm({"مرحبا بكم", "أهلا وسهلا", "a b c"}, 2, 1.0, UnitKind::word);
  lm.save(dir / "lm.json");
  auto back = NgramLM::load(dir / "lm.json");
  for (std::string t : {"مرحبا وسهلا", "a c b", "unseen words"}) EXPECT_DOUBLE_EQ(back.perplexity(t), lm.perplexity(t));
  EXPECT_EQ(back.to_json(), lm.to_json());
}

TEST(NgramLM, VersionMismatchRejected) {
  auto j = train_char_lm({"abc"}).to_json();
  j["version"] = 99;
  EXPECT_THROW(NgramLM::from_json(j), ValidationError);
  j = train_char_lm({"abc"}).to_json();
  j["format"] = "other";
  EXPECT_THROW(NgramLM::from_json(j), ValidationError);
}

TEST(NgramLM, BadParameters) {
  EXPECT_THROW(NgramLM(0, 1.0, UnitKind::word, {}), UsageError);
  EXPECT_THROW(NgramLM(2, 0.0, UnitKind::word, {}), UsageError);
}

TEST(MedianThreshold, ScalesMedian) {
  UniformLM lm(10);
  EXPECT_DOUBLE_EQ(median_scaled_threshold(lm, {"a", "b", "c"}, 3.0), 30.0);
  auto clm = train_char_lm({"abc"});
  EXPECT_THROW(median_scaled_threshold(clm, {"", "..."}), UsageError);
}
