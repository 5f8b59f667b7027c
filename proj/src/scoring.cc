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

#include "biasaudit/scoring.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

namespace biasaudit {
namespace {

constexpr char32_t kDanda = 0x0964;
constexpr char32_t kDoubleDanda = 0x0965;

bool IsCloser(char32_t c) {
  switch (c) {
    case U'"': case U'\'': case U')': case U']': case U'}':
    case 0x201D: case 0x2019: case 0x00BB:
      return true;
    default:
      return false;
  }
}

bool IsDanda(char32_t c) { return c == kDanda || c == kDoubleDanda; }

bool IsAsciiTerminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool IsTerminator(char32_t c, Language lang) {
  return IsAsciiTerminator(c) || (lang == Language::kHi && IsDanda(c));
}

}  // namespace

std::vector<std::string> SegmentSentences(std::string_view text, Language lang) {
  const std::string trimmed = Trim(text);
  if (trimmed.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot segment empty text");
  }
  const std::u32string cps = DecodeUtf8(trimmed);
  std::vector<std::string> out;
  const auto emit = [&](std::size_t begin, std::size_t end) {
    std::string seg = Trim(EncodeUtf8(std::u32string_view(cps).substr(begin, end - begin)));
    if (!seg.empty()) out.push_back(std::move(seg));
  };
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!IsTerminator(cps[i], lang)) {
      ++i;
      continue;
    }
    bool unconditional = lang == Language::kHi && IsDanda(cps[i]);
    std::size_t j = i;
    while (j < cps.size() && (IsTerminator(cps[j], lang) || IsCloser(cps[j]))) {
      if (lang == Language::kHi && IsDanda(cps[j])) unconditional = true;
      ++j;
    }
    if (unconditional || j == cps.size() || IsUnicodeSpace(cps[j])) {
      emit(start, j);
      start = j;
    }
    i = j;
  }
  if (start < cps.size()) emit(start, cps.size());
  return out;
}

bool EndsWithTerminator(std::string_view segment, Language lang) {
  const std::u32string cps = DecodeUtf8(Trim(segment));
  for (auto it = cps.rbegin(); it != cps.rend(); ++it) {
    if (IsCloser(*it)) continue;
    return IsTerminator(*it, lang);
  }
  return false;
}

SentenceScore SentenceBias(const EmbeddingVector& v,
                           const GenderCentroids& centroids) {
  SentenceScore s;
  s.sim_male = Cosine(v, centroids.male);
  s.sim_female = Cosine(v, centroids.female);
  s.bias = s.sim_male - s.sim_female;
  return s;
}

std::string_view ToString(AggregationStrategy s) {
  switch (s) {
    case AggregationStrategy::kMaxAbs: return "max_abs";
    case AggregationStrategy::kMean: return "mean";
    case AggregationStrategy::kTrimmedMean: return "trimmed_mean";
    case AggregationStrategy::kTop3Mean: return "top3_mean";
    case AggregationStrategy::kMedian: return "median";
  }
  return "";
}

AggregationStrategy ParseAggregationStrategy(std::string_view s) {
  for (auto st : {AggregationStrategy::kMaxAbs, AggregationStrategy::kMean,
                  AggregationStrategy::kTrimmedMean, AggregationStrategy::kTop3Mean,
                  AggregationStrategy::kMedian}) {
    if (ToString(st) == s) return st;
  }
  throw Error(ErrorCode::kParse, "unknown aggregation strategy '" + std::string(s) + "'");
}

const std::vector<AggregationStrategy>& AlternativeStrategies() {
  static const std::vector<AggregationStrategy> kAlternatives = {
      AggregationStrategy::kMean, AggregationStrategy::kTrimmedMean,
      AggregationStrategy::kTop3Mean, AggregationStrategy::kMedian};
  return kAlternatives;
}

std::size_t MaxAbsIndex(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no scores to aggregate");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (std::fabs(scores[i]) > std::fabs(scores[best])) best = i;
  }
  return best;
}

double Aggregate(std::span<const double> scores, AggregationStrategy strategy,
                 double trim_fraction) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no scores to aggregate");
  const std::size_t n = scores.size();
  const auto mean_of = [](auto begin, auto end) {
    return std::accumulate(begin, end, 0.0) / static_cast<double>(end - begin);
  };
  switch (strategy) {
    case AggregationStrategy::kMaxAbs:
      return scores[MaxAbsIndex(scores)];
    case AggregationStrategy::kMean:
      return mean_of(scores.begin(), scores.end());
    case AggregationStrategy::kTrimmedMean: {
      if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "trim fraction must lie in [0, 0.5), got " + FormatDouble(trim_fraction));
      }
      std::vector<double> sorted(scores.begin(), scores.end());
      std::sort(sorted.begin(), sorted.end());
      const auto k = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n)));
      return mean_of(sorted.begin() + static_cast<std::ptrdiff_t>(k),
                     sorted.end() - static_cast<std::ptrdiff_t>(k));
    }
    case AggregationStrategy::kTop3Mean: {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(scores[a]) > std::fabs(scores[b]);
      });
      const std::size_t m = std::min<std::size_t>(3, n);
      double sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) sum += scores[idx[i]];
      return sum / static_cast<double>(m);
    }
    case AggregationStrategy::kMedian: {
      std::vector<double> sorted(scores.begin(), scores.end());
      std::sort(sorted.begin(), sorted.end());
      return sorted[(n - 1) / 2];
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown aggregation strategy");
}

std::vector<double> ScoredStory::Biases() const {
  std::vector<double> b;
  b.reserve(sentences.size());
  for (const auto& s : sentences) b.push_back(s.bias);
  return b;
}

void FinalizeStory(ScoredStory& story,
                   std::span<const AggregationStrategy> strategies) {
  const std::vector<double> b = story.Biases();
  if (b.empty()) {
    throw Error(ErrorCode::kEmptyInput, "story '" + story.story_id + "' has no sentences");
  }
  story.chosen_index = MaxAbsIndex(b);
  story.story_bias = b[story.chosen_index];
  story.aggregates.clear();
  for (auto st : strategies) {
    story.aggregates[std::string(ToString(st))] = Aggregate(b, st);
  }
}

ScoredStory ScoreStory(std::string story_id,
                       std::span<const std::string> sentences,
                       Language language, const GenderCentroids& centroids,
                       EmbeddingProvider& provider,
                       std::span<const AggregationStrategy> strategies) {
  ScoredStory story;
  story.story_id = std::move(story_id);
  try {
    if (sentences.empty()) {
      throw Error(ErrorCode::kEmptyInput, "no sentences");
    }
    if (centroids.language != language) {
      throw Error(ErrorCode::kValidation,
                  "centroids are for '" + std::string(ToString(centroids.language)) +
                      "' but the story is '" + std::string(ToString(language)) + "'");
    }
    const std::vector<EmbeddingVector> vecs = provider.EmbedBatch(sentences);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      SentenceScore s = SentenceBias(vecs[i], centroids);
      s.index = i;
      s.text = sentences[i];
      if (std::fabs(s.bias) > 1.0) {
        spdlog::warn("story {} sentence {}: |bias| = {} exceeds 1", story.story_id,
                     i, std::fabs(s.bias));
      }
      story.sentences.push_back(std::move(s));
    }
    FinalizeStory(story, strategies);
  } catch (const Error& e) {
    throw Error(e.code(), "story '" + story.story_id + "': " + e.what());
  }
  return story;
}

Json ToJson(const ScoredStory& s, bool redact) {
  Json j;
  j["story_id"] = s.story_id;
  j["condition_id"] = s.condition_id;
  j["model"] = s.model;
  j["language"] = ToString(s.condition.language);
  j["gender"] = ToString(s.condition.gender);
  j["occupation"] = s.condition.occupation_slug;
  j["occ_type"] = s.occ_type ? Json(ToString(*s.occ_type)) : Json(nullptr);
  j["personality"] = s.condition.PersonalityLabel();
  j["story_bias"] = s.story_bias;
  j["chosen_index"] = s.chosen_index;
  j["aggregates"] = s.aggregates;
  Json sents = Json::array();
  for (const auto& x : s.sentences) {
    Json o{{"index", x.index}, {"bias", x.bias}, {"sim_male", x.sim_male},
           {"sim_female", x.sim_female}};
    if (!redact) o["text"] = x.text;
    sents.push_back(std::move(o));
  }
  j["sentences"] = std::move(sents);
  return j;
}

ScoredStory ScoredStoryFromJson(const Json& j) {
  ScoredStory s;
  s.story_id = j.at("story_id").get<std::string>();
  s.condition_id = j.at("condition_id").get<std::string>();
  s.condition = ParseConditionId(s.condition_id);
  s.model = j.at("model").get<std::string>();
  if (j.contains("occ_type") && !j.at("occ_type").is_null()) {
    s.occ_type = ParseGender(j.at("occ_type").get<std::string>());
  }
  for (const auto& o : j.at("sentences")) {
    SentenceScore x;
    x.index = o.at("index").get<std::size_t>();
    x.text = o.value("text", std::string());
    x.bias = o.at("bias").get<double>();
    x.sim_male = o.at("sim_male").get<double>();
    x.sim_female = o.at("sim_female").get<double>();
    s.sentences.push_back(std::move(x));
  }
  s.story_bias = j.at("story_bias").get<double>();
  s.chosen_index = j.at("chosen_index").get<std::size_t>();
  if (j.contains("aggregates")) {
    s.aggregates = j.at("aggregates").get<std::map<std::string, double>>();
  }
  return s;
}

std::vector<ScoredStory> LoadScoredStories(const std::filesystem::path& path) {
  std::vector<ScoredStory> out;
  for (const auto& line : ReadJsonLines(path)) {
    try {
      out.push_back(ScoredStoryFromJson(line.value));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line.line_number) +
                                ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" +
                                         std::to_string(line.line_number) + ": " +
                                         e.what());
    }
  }
  return out;
}

void WriteScoredStories(const std::filesystem::path& path,
                        std::vector<ScoredStory> stories, bool redact) {
  std::sort(stories.begin(), stories.end(),
            [](const auto& a, const auto& b) { return a.story_id < b.story_id; });
  std::string out;
  for (const auto& s : stories) out += ToJson(s, redact).dump() + "\n";
  WriteFileAtomic(path, out);
}

std::string_view LeaningLabel(double value) { return value > 0.0 ? "male" : "female"; }

AggregatorComparison CompareAggregators(std::span<const ScoredStory> stories,
                                        double trim_fraction) {
  if (stories.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no stories to compare");
  }
  if (stories.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "aggregator comparison needs >= 2 stories");
  }
  std::vector<std::vector<double>> biases;
  std::vector<std::string> reference;
  for (const auto& s : stories) {
    biases.push_back(s.Biases());
    reference.emplace_back(
        LeaningLabel(Aggregate(biases.back(), AggregationStrategy::kMaxAbs)));
  }
  AggregatorComparison c;
  c.n_stories = stories.size();
  for (auto st : AlternativeStrategies()) {
    std::vector<std::string> alt;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < biases.size(); ++i) {
      alt.emplace_back(LeaningLabel(Aggregate(biases[i], st, trim_fraction)));
      if (alt.back() == reference[i]) ++agree;
    }
    AggregatorAgreement a;
    a.sign_agreement_pct =
        100.0 * static_cast<double>(agree) / static_cast<double>(biases.size());
    a.cohen_kappa = CohenKappa(reference, alt);
    c.per_strategy[std::string(ToString(st))] = a;
  }
  return c;
}

Json ToJson(const AggregatorComparison& c) {
  Json j;
  j["n_stories"] = c.n_stories;
  j["reference"] = ToString(AggregationStrategy::kMaxAbs);
  Json per = Json::object();
  for (const auto& [name, a] : c.per_strategy) {
    per[name] = Json{{"sign_agreement_pct", a.sign_agreement_pct},
                     {"cohen_kappa", a.cohen_kappa.value},
                     {"kappa_degenerate", a.cohen_kappa.degenerate}};
  }
  j["per_strategy"] = std::move(per);
  return j;
}

double MeanPairwiseCosineDistance(std::span<const EmbeddingVector> vectors) {
  if (vectors.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "stability check needs >= 2 texts");
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < vectors.size(); ++a) {
    for (std::size_t b = a + 1; b < vectors.size(); ++b) {
      sum += 1.0 - Cosine(vectors[a], vectors[b]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double StabilityCheck(std::span<const std::string> texts,
                      EmbeddingProvider& provider) {
  if (texts.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "stability check needs >= 2 texts");
  }
  return MeanPairwiseCosineDistance(provider.EmbedBatch(texts));
}

}  // namespace biasaudit
