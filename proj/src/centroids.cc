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

#include "biasaudit/centroids.h"

#include <chrono>
#include <cmath>
#include <ctime>
#include <vector>

#include "biasaudit/util.h"

namespace biasaudit {
namespace {

std::vector<EmbeddingVector> NormalizeAll(std::span<const EmbeddingVector> vs) {
  std::vector<EmbeddingVector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(v.normalized() ? v : Normalize(v));
  return out;
}

double MeanCosine(const EmbeddingVector& w,
                  const std::vector<EmbeddingVector>& attrs) {
  double s = 0.0;
  for (const auto& a : attrs) s += Dot(w, a);
  return s / static_cast<double>(attrs.size());
}

void RequireUniformDim(std::span<const EmbeddingVector> vs, std::size_t dim,
                       const char* what) {
  for (const auto& v : vs) {
    if (v.dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  std::string(what) + ": vector of dim " +
                      std::to_string(v.dim()) + ", expected " +
                      std::to_string(dim));
    }
  }
}

}  // namespace

EmbeddingVector MeanVector(std::span<const EmbeddingVector> vectors) {
  if (vectors.empty()) {
    throw Error(ErrorCode::kEmptyInput, "mean of an empty vector set");
  }
  const std::size_t dim = vectors.front().dim();
  RequireUniformDim(vectors, dim, "mean");
  std::vector<double> sum(dim, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
  }
  for (double& x : sum) x /= static_cast<double>(vectors.size());
  return EmbeddingVector(std::move(sum));
}

GenderCentroids BuildCentroids(std::span<const EmbeddingVector> male_sents,
                               std::span<const EmbeddingVector> female_sents) {
  if (male_sents.empty() || female_sents.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                std::string("centroid side is empty: ") +
                    (male_sents.empty() ? "male" : "female"));
  }
  const std::size_t dim = male_sents.front().dim();
  RequireUniformDim(male_sents, dim, "male sentences");
  RequireUniformDim(female_sents, dim, "female sentences");

  GenderCentroids c;
  const EmbeddingVector male_mean = MeanVector(male_sents);
  const EmbeddingVector female_mean = MeanVector(female_sents);
  if (!(male_mean.Norm() > 0.0) || !(female_mean.Norm() > 0.0)) {
    throw Error(ErrorCode::kZeroVector,
                std::string("mean of ") +
                    (male_mean.Norm() > 0.0 ? "female" : "male") +
                    " sentences has zero norm");
  }
  c.male = Normalize(male_mean);
  c.female = Normalize(female_mean);
  c.n_male = male_sents.size();
  c.n_female = female_sents.size();
  c.created_at = NowIso8601();
  return c;
}

Json ToJson(const GenderCentroids& c) {
  return Json{
      {"language", ToString(c.language)},
      {"model", c.model_id},
      {"dim", c.dim()},
      {"n_male", c.n_male},
      {"n_female", c.n_female},
      {"male", std::vector<double>(c.male.values().begin(), c.male.values().end())},
      {"female",
       std::vector<double>(c.female.values().begin(), c.female.values().end())}};
}

namespace {

// Saved vectors round-trip exactly and are kept bit-for-bit; anything
// visibly off unit length (a hand-edited file) is renormalized.
EmbeddingVector UnitFromFile(std::vector<double> values) {
  EmbeddingVector v(std::move(values));
  if (std::abs(v.Norm() - 1.0) <= 1e-12) {
    return EmbeddingVector(std::vector<double>(v.values().begin(), v.values().end()),
                           /*normalized=*/true);
  }
  return Normalize(v);
}

}  // namespace

GenderCentroids CentroidsFromJson(const Json& j) {
  GenderCentroids c;
  c.language = ParseLanguage(j.at("language").get<std::string>());
  c.model_id = j.at("model").get<std::string>();
  c.n_male = j.at("n_male").get<std::size_t>();
  c.n_female = j.at("n_female").get<std::size_t>();
  const auto dim = j.at("dim").get<std::size_t>();
  auto male = j.at("male").get<std::vector<double>>();
  auto female = j.at("female").get<std::vector<double>>();
  if (male.size() != dim || female.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "centroid vectors do not match declared dim " +
                    std::to_string(dim));
  }
  if (c.n_male == 0 || c.n_female == 0) {
    throw Error(ErrorCode::kValidation, "centroid file has a zero count");
  }
  c.male = UnitFromFile(std::move(male));
  c.female = UnitFromFile(std::move(female));
  return c;
}

void SaveCentroids(const std::filesystem::path& path, const GenderCentroids& c) {
  WriteFileAtomic(path, ToJson(c).dump(2) + "\n");
}

GenderCentroids LoadCentroids(const std::filesystem::path& path) {
  try {
    return CentroidsFromJson(Json::parse(ReadFile(path)));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

WeatReport WeatEffectSize(std::span<const EmbeddingVector> target_words_male,
                          std::span<const EmbeddingVector> target_words_female,
                          std::span<const EmbeddingVector> attr_sents_male,
                          std::span<const EmbeddingVector> attr_sents_female) {
  if (target_words_male.empty() || target_words_female.empty() ||
      attr_sents_male.empty() || attr_sents_female.empty()) {
    throw Error(ErrorCode::kEmptyInput, "WEAT needs four non-empty sets");
  }
  const std::size_t dim = target_words_male.front().dim();
  RequireUniformDim(target_words_male, dim, "male targets");
  RequireUniformDim(target_words_female, dim, "female targets");
  RequireUniformDim(attr_sents_male, dim, "male attributes");
  RequireUniformDim(attr_sents_female, dim, "female attributes");

  const auto tm = NormalizeAll(target_words_male);
  const auto tf = NormalizeAll(target_words_female);
  const auto am = NormalizeAll(attr_sents_male);
  const auto af = NormalizeAll(attr_sents_female);

  auto assoc = [&](const EmbeddingVector& w) {
    return MeanCosine(w, am) - MeanCosine(w, af);
  };
  std::vector<double> scores_m, scores_f;
  for (const auto& w : tm) scores_m.push_back(assoc(w));
  for (const auto& w : tf) scores_f.push_back(assoc(w));

  auto sum = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  };
  WeatReport r;
  r.n_targets_male = scores_m.size();
  r.n_targets_female = scores_f.size();
  const double sum_m = sum(scores_m);
  const double sum_f = sum(scores_f);
  r.mean_assoc_male = sum_m / static_cast<double>(scores_m.size());
  r.mean_assoc_female = sum_f / static_cast<double>(scores_f.size());

  // Per-group sums combined symmetrically, so the mirror swap of both
  // target and attribute sets reproduces pooled_std bit for bit.
  const auto n = static_cast<double>(scores_m.size() + scores_f.size());
  const double mu = (sum_m + sum_f) / n;
  auto sq_dev = [mu](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return s;
  };
  r.pooled_std = std::sqrt((sq_dev(scores_m) + sq_dev(scores_f)) / n);
  if (r.pooled_std < kWeatMinPooledStd) {
    throw Error(ErrorCode::kDegenerate,
                "all WEAT association scores are equal (std " +
                    FormatDouble(r.pooled_std) + ")");
  }
  r.effect_size_d = (r.mean_assoc_male - r.mean_assoc_female) / r.pooled_std;
  return r;
}

Json ToJson(const WeatReport& r) {
  return Json{{"effect_size_d", r.effect_size_d},
              {"mean_assoc_male", r.mean_assoc_male},
              {"mean_assoc_female", r.mean_assoc_female},
              {"pooled_std", r.pooled_std},
              {"std_form", "population"},
              {"n_targets_male", r.n_targets_male},
              {"n_targets_female", r.n_targets_female}};
}

}  // namespace biasaudit
