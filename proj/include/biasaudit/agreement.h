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

#ifndef BIASAUDIT_AGREEMENT_H_
#define BIASAUDIT_AGREEMENT_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/types.h"
#include "biasaudit/util.h"

namespace biasaudit {

// A chance-corrected agreement value. When chance agreement is 1 (a single
// category observed everywhere) the statistic is undefined; it is then
// reported as 1.0 with `degenerate` set.
struct KappaResult {
  double value = 0.0;
  bool degenerate = false;
};

// Fleiss' kappa over an items x raters matrix of category labels.
// Throws kValidation for ragged rows, kInvalidArgument for < 2 items or
// < 2 raters.
KappaResult FleissKappa(const std::vector<std::vector<std::string>>& labels);

// Cohen's kappa for two equal-length label sequences (length >= 2).
KappaResult CohenKappa(std::span<const std::string> a,
                       std::span<const std::string> b);

struct AnnotationItem {
  std::string pair_id;
  std::string occupation;
  Gender gender = Gender::kMale;
  std::vector<std::string> labels;              // one per annotator, "A"/"B"
  std::optional<std::string> personality_side;  // where the conditioned story sits
};

struct AnnotationSet {
  std::vector<AnnotationItem> items;
  std::size_t n_annotators = 0;
  Language language = Language::kEn;
  std::optional<std::map<std::string, std::string>> truth_map;
};

// Reads the line-JSON annotation format. truth_map is populated iff every
// item carries "personality_side".
AnnotationSet LoadAnnotations(const std::filesystem::path& path,
                              Language language);
AnnotationSet ParseAnnotations(const std::vector<JsonLine>& lines,
                               Language language, std::string_view source);

// Label chosen by more than half of the annotators. Throws kTie naming the
// pair_id when no label has a strict majority.
std::map<std::string, std::string> MajorityVote(const AnnotationSet& set);

// Percent of voted items whose label equals the conditioned side. Throws
// kCoverage listing pair_ids absent from `truth`.
double DetectionRate(const std::map<std::string, std::string>& votes,
                     const std::map<std::string, std::string>& truth);

struct AgreementReport {
  KappaResult fleiss_kappa;
  std::map<std::string, KappaResult> pairwise_cohen;  // "0-1", "0-2", ...
  std::map<std::string, KappaResult> kappa_by_gender;
  std::map<std::string, std::string> majority_labels;
  std::optional<double> detection_rate_pct;
  double unanimous_pct = 0.0;
  std::size_t n_items = 0;
};

AgreementReport ComputeAgreement(const AnnotationSet& set, bool by_gender);
Json ToJson(const AgreementReport& report);

}  // namespace biasaudit

#endif  // BIASAUDIT_AGREEMENT_H_
