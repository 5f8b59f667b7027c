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

#ifndef BIASAUDIT_CENTROIDS_H_
#define BIASAUDIT_CENTROIDS_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

#include "biasaudit/embedding.h"
#include "biasaudit/types.h"

namespace biasaudit {

// Male/female stereotype anchors. Both vectors are stored normalized.
struct GenderCentroids {
  EmbeddingVector male;
  EmbeddingVector female;
  Language language = Language::kEn;
  std::string model_id;
  std::size_t n_male = 0;
  std::size_t n_female = 0;
  std::string created_at;  // ISO-8601 UTC; not persisted

  std::size_t dim() const { return male.dim(); }
};

// Component-wise mean of each side, then L2 normalization. Throws
// kEmptyInput, kDimensionMismatch, or kZeroVector (mean has zero norm).
GenderCentroids BuildCentroids(std::span<const EmbeddingVector> male_sents,
                               std::span<const EmbeddingVector> female_sents);

// Unnormalized component-wise mean; all vectors must share a dimension.
EmbeddingVector MeanVector(std::span<const EmbeddingVector> vectors);

Json ToJson(const GenderCentroids& c);
GenderCentroids CentroidsFromJson(const Json& j);
void SaveCentroids(const std::filesystem::path& path, const GenderCentroids& c);
GenderCentroids LoadCentroids(const std::filesystem::path& path);

struct WeatReport {
  double effect_size_d = 0.0;
  double mean_assoc_male = 0.0;
  double mean_assoc_female = 0.0;
  double pooled_std = 0.0;  // population std of all target association scores
  std::size_t n_targets_male = 0;
  std::size_t n_targets_female = 0;
};

inline constexpr double kWeatMinPooledStd = 1e-12;

// WEAT-style Cohen's d. For each target w,
//   assoc(w) = mean_a cos(w, a_male) - mean_b cos(w, b_female)
// and d = (mean assoc over male targets - mean over female targets) divided
// by the population standard deviation of assoc over all targets. Inputs
// are L2-normalized first. Throws kDegenerate when that deviation is below
// kWeatMinPooledStd.
WeatReport WeatEffectSize(std::span<const EmbeddingVector> target_words_male,
                          std::span<const EmbeddingVector> target_words_female,
                          std::span<const EmbeddingVector> attr_sents_male,
                          std::span<const EmbeddingVector> attr_sents_female);

Json ToJson(const WeatReport& r);

}  // namespace biasaudit

#endif  // BIASAUDIT_CENTROIDS_H_
