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

#ifndef BIASAUDIT_SCORING_H_
#define BIASAUDIT_SCORING_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/agreement.h"
#include "biasaudit/centroids.h"
#include "biasaudit/corpus.h"
#include "biasaudit/embedding.h"
#include "biasaudit/types.h"

namespace biasaudit {

// Rule-based splitter. ". ! ?" close a sentence only before whitespace or
// end of text; the danda closes unconditionally (Hindi). Runs of
// terminators and trailing closing quotes stay with their sentence.
// Throws kEmptyInput when the trimmed text is empty.
std::vector<std::string> SegmentSentences(std::string_view text, Language lang);

// True when the last code point (ignoring closing quotes/brackets) is a
// terminator for `lang`.
bool EndsWithTerminator(std::string_view segment, Language lang);

struct SentenceScore {
  std::size_t index = 0;
  std::string text;
  double bias = 0.0;
  double sim_male = 0.0;
  double sim_female = 0.0;
};

// Fills sim_male, sim_female and bias = sim_male - sim_female.
SentenceScore SentenceBias(const EmbeddingVector& v,
                           const GenderCentroids& centroids);

enum class AggregationStrategy { kMaxAbs, kMean, kTrimmedMean, kTop3Mean, kMedian };

inline constexpr double kDefaultTrimFraction = 0.1;

std::string_view ToString(AggregationStrategy s);
AggregationStrategy ParseAggregationStrategy(std::string_view s);
const std::vector<AggregationStrategy>& AlternativeStrategies();

// Smallest index attaining max |x|. Throws kEmptyInput.
std::size_t MaxAbsIndex(std::span<const double> scores);
// trim_fraction applies to kTrimmedMean only and must lie in [0, 0.5).
double Aggregate(std::span<const double> scores, AggregationStrategy strategy,
                 double trim_fraction = kDefaultTrimFraction);

struct ScoredStory {
  std::string story_id;
  std::string condition_id;
  ConditionKey condition;
  std::string model;
  std::optional<Gender> occ_type;  // known only when the grid is supplied
  std::vector<SentenceScore> sentences;
  double story_bias = 0.0;
  std::size_t chosen_index = 0;
  std::map<std::string, double> aggregates;

  std::vector<double> Biases() const;
};

// Sets story_bias and chosen_index from the sentence biases, plus one
// aggregate entry per requested strategy.
void FinalizeStory(ScoredStory& story,
                   std::span<const AggregationStrategy> strategies = {});

// Embeds and scores pre-segmented sentences. Errors from the provider are
// rethrown with the story_id prepended. Sentences with |bias| > 1 are
// logged as warnings.
ScoredStory ScoreStory(std::string story_id,
                       std::span<const std::string> sentences,
                       Language language, const GenderCentroids& centroids,
                       EmbeddingProvider& provider,
                       std::span<const AggregationStrategy> strategies = {});

Json ToJson(const ScoredStory& story, bool redact = false);
ScoredStory ScoredStoryFromJson(const Json& j);
std::vector<ScoredStory> LoadScoredStories(const std::filesystem::path& path);
// Sorted by story_id.
void WriteScoredStories(const std::filesystem::path& path,
                        std::vector<ScoredStory> stories, bool redact = false);

struct AggregatorAgreement {
  double sign_agreement_pct = 0.0;
  KappaResult cohen_kappa;
};

struct AggregatorComparison {
  std::map<std::string, AggregatorAgreement> per_strategy;
  std::size_t n_stories = 0;
};

// Binary direction label: "male" iff value > 0.
std::string_view LeaningLabel(double value);

// Compares each alternative strategy's sign against max_abs over the
// same stories. Throws kEmptyInput for an empty set and kInvalidArgument
// for fewer than 2 stories.
AggregatorComparison CompareAggregators(std::span<const ScoredStory> stories,
                                        double trim_fraction = kDefaultTrimFraction);
Json ToJson(const AggregatorComparison& c);

// Mean over unordered pairs of (1 - cosine) between whole-text embeddings.
double StabilityCheck(std::span<const std::string> texts,
                      EmbeddingProvider& provider);
double MeanPairwiseCosineDistance(std::span<const EmbeddingVector> vectors);

}  // namespace biasaudit

#endif  // BIASAUDIT_SCORING_H_
