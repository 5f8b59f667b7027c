// Copyright 2026 The biasaudit Authors.
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

#include <cmath>
#include <random>

#include "biasaudit/scoring.h"
#include "doctest.h"
#include "oracles.h"

using namespace biasaudit;

namespace {

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kParse;
}

EmbeddingVector V(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

GenderCentroids Centroids(const EmbeddingVector& m, const EmbeddingVector& f) {
  GenderCentroids c;
  c.male = Normalize(m);
  c.female = Normalize(f);
  c.n_male = c.n_female = 1;
  c.model_id = "map";
  return c;
}

ScoredStory StoryFromBiases(const std::string& id, const std::vector<double>& biases) {
  ScoredStory s;
  s.story_id = id;
  s.condition_id = "en-male-engineer-base";
  for (std::size_t i = 0; i < biases.size(); ++i) {
    s.sentences.push_back(SentenceScore{i, "s", biases[i], 0.0, 0.0});
  }
  FinalizeStory(s);
  return s;
}

std::string StripSpaces(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\n' && c != '\t') out += c;
  return out;
}

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("segmentation examples") {
    CHECK(SegmentSentences("A. B! C?", Language::kEn) == std::vector<std::string>{"A.", "B!", "C?"});
    const auto hi = SegmentSentences("मैं घर गई। वह आया।", Language::kHi);
    REQUIRE(hi.size() == 2);
    CHECK(hi[0] == "मैं घर गई।");
    CHECK(SegmentSentences("No terminator here", Language::kEn) ==
          std::vector<std::string>{"No terminator here"});
    CHECK(CodeOf([] { SegmentSentences("  \n ", Language::kEn); }) == ErrorCode::kEmptyInput);
  }

  TEST_CASE("segmentation edge rules") {
    CHECK(SegmentSentences("Pi is 3.14 today. Yes.", Language::kEn).size() == 2);
    CHECK(SegmentSentences("Wait!! \"Go.\" Then", Language::kEn) ==
          std::vector<std::string>{"Wait!!", "\"Go.\"", "Then"});
    CHECK(SegmentSentences("एक।दो", Language::kHi).size() == 2);
    CHECK(SegmentSentences("एक।दो", Language::kEn).size() == 1);
    CHECK(SegmentSentences("वह आया? हाँ.", Language::kHi).size() == 2);
    CHECK(EndsWithTerminator("done.)", Language::kEn));
    CHECK_FALSE(EndsWithTerminator("done", Language::kEn));
  }

  TEST_CASE("segments reconstruct the input ignoring whitespace") {
    const std::vector<std::string> inputs = {
        "  One. Two!  Three? four", "मैं घर गई। वह आया।  फिर", "x", "...", "a.b. c", "”Hi.” she said."};
    for (const auto& in : inputs) {
      std::string joined;
      for (const auto& s : SegmentSentences(in, Language::kHi)) {
        CHECK_FALSE(s.empty());
        joined += s;
      }
      CHECK(StripSpaces(joined) == StripSpaces(in));
    }
  }

  TEST_CASE("sentence bias examples") {
    const auto same = Centroids(V({1, 2, 3}), V({1, 2, 3}));
    CHECK(SentenceBias(V({0.3, -1, 2}), same).bias == 0.0);
    const auto ortho = Centroids(V({1, 0}), V({0, 1}));
    const auto s = SentenceBias(V({1, 0}), ortho);
    CHECK(s.bias == 1.0);
    CHECK(s.sim_male == 1.0);
    CHECK(s.sim_female == 0.0);
    CHECK(CodeOf([&] { SentenceBias(V({1, 0, 0}), ortho); }) == ErrorCode::kDimensionMismatch);

    const auto v = DeterministicEmbed("v", 8, 11);
    const auto c = Centroids(DeterministicEmbed("m", 8, 11), DeterministicEmbed("f", 8, 11));
    auto raw = [](const EmbeddingVector& e) {
      return std::vector<double>(e.values().begin(), e.values().end());
    };
    const double expect = oracle::CosinePlain(raw(v), raw(c.male)) -
                          oracle::CosinePlain(raw(v), raw(c.female));
    const auto sb = SentenceBias(v, c);
    CHECK(std::abs(sb.bias - expect) <= 1e-12);
    CHECK(std::abs(sb.bias - (sb.sim_male - sb.sim_female)) <= 1e-12);
  }

  TEST_CASE("story argmax and ties") {
    auto s1 = StoryFromBiases("a", {0.1, -0.3, 0.2});
    CHECK(s1.story_bias == -0.3);
    CHECK(s1.chosen_index == 1);
    auto s2 = StoryFromBiases("b", {0.3, -0.3});
    CHECK(s2.story_bias == 0.3);
    CHECK(s2.chosen_index == 0);
    std::size_t idx = 99;
    oracle::MaxAbsScan({0.3, -0.3}, &idx);
    CHECK(idx == 0);
    auto s3 = StoryFromBiases("c", {0.7});
    CHECK(s3.story_bias == 0.7);
    CHECK(s3.chosen_index == 0);
    auto s4 = StoryFromBiases("d", {0.1, -0.3, 0.2, 0.2});
    CHECK(s4.story_bias == s1.story_bias);
  }

  TEST_CASE("score story through a provider, with swapped centroids") {
    const std::map<std::string, EmbeddingVector> table = {
        {"He fixed it.", V({0.9, 0.1, 0.2})},
        {"She smiled.", V({0.1, 0.8, 0.3})},
        {"It rained.", V({0.4, 0.4, 0.9})}};
    EmbeddingProviderConfig cfg;
    cfg.model_id = "map";
    EmbeddingProvider p(cfg, std::make_unique<oracle::MapBackend>(table));
    const auto c = Centroids(V({1, 0, 0}), V({0, 1, 0}));
    const auto swapped = Centroids(V({0, 1, 0}), V({1, 0, 0}));
    const std::vector<std::string> sents = {"He fixed it.", "She smiled.", "It rained."};
    const auto s = ScoreStory("m:c:0", sents, Language::kEn, c, p);
    const auto t = ScoreStory("m:c:0", sents, Language::kEn, swapped, p);
    REQUIRE(s.sentences.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(t.sentences[i].bias == -s.sentences[i].bias);
    CHECK(t.story_bias == -s.story_bias);
    CHECK(t.chosen_index == s.chosen_index);
    CHECK(s.story_bias == s.sentences[s.chosen_index].bias);

    auto hi = c;
    hi.language = Language::kHi;
    CHECK(CodeOf([&] { ScoreStory("x", sents, Language::kEn, hi, p); }) == ErrorCode::kValidation);

    const std::vector<std::string> unknown = {"Not in table."};
    try {
      ScoreStory("story-7", unknown, Language::kEn, c, p);
      FAIL("expected provider error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("story-7") != std::string::npos);
    }
  }

  TEST_CASE("aggregate examples") {
    const std::vector<double> one = {0.5};
    for (auto st : {AggregationStrategy::kMaxAbs, AggregationStrategy::kMean,
                    AggregationStrategy::kTrimmedMean, AggregationStrategy::kTop3Mean,
                    AggregationStrategy::kMedian}) {
      CHECK(Aggregate(one, st) == 0.5);
      const std::vector<double> ten(10, -0.25);
      CHECK(Aggregate(ten, st) == -0.25);
    }
    const std::vector<double> x = {-0.4, 0.1, 0.2};
    CHECK(Aggregate(x, AggregationStrategy::kMaxAbs) == -0.4);
    CHECK(Aggregate(x, AggregationStrategy::kMean) == doctest::Approx(-0.1 / 3).epsilon(1e-12));
    CHECK(Aggregate(x, AggregationStrategy::kMedian) == 0.1);
    CHECK(Aggregate(x, AggregationStrategy::kTop3Mean) == doctest::Approx(-0.1 / 3).epsilon(1e-12));
    const std::vector<double> even = {4, 1, 3, 2};
    CHECK(Aggregate(even, AggregationStrategy::kMedian) == 2);
    CHECK(CodeOf([] { Aggregate(std::vector<double>{}, AggregationStrategy::kMean); }) ==
          ErrorCode::kEmptyInput);
    CHECK(CodeOf([&] { Aggregate(x, AggregationStrategy::kTrimmedMean, 0.5); }) ==
          ErrorCode::kInvalidArgument);
  }

  TEST_CASE("aggregates agree with brute-force oracles") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> len(1, 12);
    for (int i = 0; i < 300; ++i) {
      std::vector<double> x(len(rng));
      for (double& v : x) v = u(rng);
      CHECK(Aggregate(x, AggregationStrategy::kMaxAbs) == oracle::MaxAbsScan(x));
      CHECK(std::abs(Aggregate(x, AggregationStrategy::kMean) - oracle::MeanPlain(x)) <= 1e-12);
      CHECK(std::abs(Aggregate(x, AggregationStrategy::kTrimmedMean) -
                     oracle::TrimmedMeanPlain(x, 0.1)) <= 1e-12);
      CHECK(std::abs(Aggregate(x, AggregationStrategy::kTop3Mean) - oracle::Top3MeanPlain(x)) <=
            1e-12);
      CHECK(Aggregate(x, AggregationStrategy::kMedian) == oracle::LowerMedianPlain(x));
      std::vector<double> scaled = x;
      for (double& v : scaled) v *= 2.5;
      CHECK(std::abs(Aggregate(scaled, AggregationStrategy::kMean) -
                     2.5 * Aggregate(x, AggregationStrategy::kMean)) <= 1e-12);
    }
  }

  TEST_CASE("strategy names round trip") {
    for (auto st : AlternativeStrategies()) CHECK(ParseAggregationStrategy(ToString(st)) == st);
    CHECK(ParseAggregationStrategy("max_abs") == AggregationStrategy::kMaxAbs);
    CHECK_THROWS_AS(ParseAggregationStrategy("mode"), Error);
  }

  TEST_CASE("compare aggregators: forced agreement is degenerate") {
    std::vector<ScoredStory> stories = {StoryFromBiases("a", {0.1, 0.2}),
                                        StoryFromBiases("b", {0.3, 0.05})};
    const auto cmp = CompareAggregators(stories);
    CHECK(cmp.n_stories == 2);
    for (const auto& [name, a] : cmp.per_strategy) {
      CHECK(a.sign_agreement_pct == 100.0);
      CHECK(a.cohen_kappa.value == 1.0);
      CHECK(a.cohen_kappa.degenerate);
    }
    CHECK(CodeOf([] { CompareAggregators(std::vector<ScoredStory>{}); }) == ErrorCode::kEmptyInput);
  }

  TEST_CASE("compare aggregators: three planted disagreements out of twenty") {
    std::vector<ScoredStory> stories;
    std::vector<std::string> ref, alt;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> b;
      if (i < 3) {
        b = {0.9, -0.5, -0.5};  // max_abs male, mean female
      } else if (i % 2 == 0) {
        b = {0.4, 0.1, -0.05};
      } else {
        b = {-0.4, -0.1, 0.05};
      }
      stories.push_back(StoryFromBiases("s" + std::to_string(100 + i), b));
      ref.emplace_back(LeaningLabel(oracle::MaxAbsScan(b)));
      alt.emplace_back(LeaningLabel(oracle::MeanPlain(b)));
    }
    const auto cmp = CompareAggregators(stories);
    const auto& mean = cmp.per_strategy.at("mean");
    CHECK(mean.sign_agreement_pct == doctest::Approx(85.0));
    CHECK(std::abs(mean.cohen_kappa.value - oracle::CohenConfusion(ref, alt)) <= 1e-10);

    std::vector<ScoredStory> doubled = stories;
    for (auto s : stories) {
      s.story_id += "-dup";
      doubled.push_back(s);
    }
    const auto cmp2 = CompareAggregators(doubled);
    CHECK(cmp2.per_strategy.at("mean").sign_agreement_pct == doctest::Approx(85.0));
    CHECK(std::abs(cmp2.per_strategy.at("mean").cohen_kappa.value - mean.cohen_kappa.value) <=
          1e-12);
  }

  TEST_CASE("leaning label treats zero as female") {
    CHECK(LeaningLabel(0.0) == "female");
    CHECK(LeaningLabel(1e-300) == "male");
  }

  TEST_CASE("stability check") {
    EmbeddingProviderConfig cfg;
    cfg.dim = 16;
    cfg.seed = 4;
    EmbeddingProvider p(cfg);
    const std::vector<std::string> same = {"t", "t", "t"};
    CHECK(std::abs(StabilityCheck(same, p)) <= 1e-9);

    EmbeddingProvider ortho(cfg, std::make_unique<oracle::MapBackend>(
                                     std::map<std::string, EmbeddingVector>{
                                         {"a", V({1, 0})}, {"b", V({0, 1})}}));
    const std::vector<std::string> ab = {"a", "b"};
    CHECK(StabilityCheck(ab, ortho) == doctest::Approx(1.0).epsilon(1e-15));

    const std::vector<std::string> five = {"p", "q", "r", "s", "t"};
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = i + 1; j < 5; ++j) {
        const auto a = DeterministicEmbed(five[i], 16, 4);
        const auto b = DeterministicEmbed(five[j], 16, 4);
        sum += 1.0 - oracle::CosinePlain({a.values().begin(), a.values().end()},
                                         {b.values().begin(), b.values().end()});
        ++pairs;
      }
    }
    CHECK(std::abs(StabilityCheck(five, p) - sum / pairs) <= 1e-12);
    CHECK(CodeOf([&] { StabilityCheck(std::vector<std::string>{"x"}, p); }) ==
          ErrorCode::kInvalidArgument);
  }

  TEST_CASE("scored story json round trip and redaction") {
    auto s = StoryFromBiases("m:en-male-engineer-base:0", {0.2, -0.1});
    s.model = "m";
    s.condition = ParseConditionId(s.condition_id);
    s.occ_type = Gender::kMale;
    FinalizeStory(s, AlternativeStrategies());
    const auto back = ScoredStoryFromJson(ToJson(s));
    CHECK(back.story_bias == s.story_bias);
    CHECK(back.aggregates == s.aggregates);
    CHECK(back.occ_type == s.occ_type);
    CHECK(back.sentences.size() == 2);
    CHECK_FALSE(ToJson(s, true)["sentences"][0].contains("text"));
  }
}
