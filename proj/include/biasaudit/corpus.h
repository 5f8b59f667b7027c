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

#ifndef BIASAUDIT_CORPUS_H_
#define BIASAUDIT_CORPUS_H_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/types.h"
#include "biasaudit/util.h"

namespace biasaudit {

enum class Framework { kHexaco, kDarkTriad };
enum class TraitLevel { kHigh, kLow };

std::string_view ToString(Framework f);
std::string_view ToString(TraitLevel l);
Framework ParseFramework(std::string_view s);
TraitLevel ParseTraitLevel(std::string_view s);

inline constexpr std::string_view kBaselineLabel = "BASELINE";
inline constexpr std::size_t kShippedOccupationCount = 50;
inline constexpr std::size_t kShippedPersonalityCount = 18;

struct OccupationSpec {
  std::string name;
  Gender stereotype = Gender::kMale;
  std::string artifact;
  std::string scenario;

  std::string Slug() const { return Slugify(name); }
  bool operator==(const OccupationSpec&) const = default;
};

struct PersonalitySpec {
  Framework framework = Framework::kHexaco;
  std::string trait;
  TraitLevel level = TraitLevel::kHigh;
  std::string description;

  std::string TraitSlug() const { return Slugify(trait); }
  // "hexaco/agreeableness/high"; the factor level used by analysis.
  std::string Label() const;
  bool operator==(const PersonalitySpec&) const = default;
};

// The field values encoded by a condition_id. Baselines have no framework.
struct ConditionKey {
  Language language = Language::kEn;
  PersonaGender gender = PersonaGender::kNeutral;
  std::string occupation_slug;
  std::optional<Framework> framework;
  std::string trait_slug;
  std::optional<TraitLevel> level;

  bool is_baseline() const { return !framework.has_value(); }
  // kBaselineLabel or "{framework}/{trait-slug}/{level}".
  std::string PersonalityLabel() const;
  bool operator==(const ConditionKey&) const = default;
};

// "{lang}-{gender}-{occupation}-{framework}-{trait}-{level}" or
// "{lang}-{gender}-{occupation}-base".
std::string FormatConditionId(const ConditionKey& key);
// Inverse of FormatConditionId; throws kParse on malformed ids.
ConditionKey ParseConditionId(std::string_view id);

struct PersonaCondition {
  PersonaGender gender = PersonaGender::kNeutral;
  OccupationSpec occupation;
  std::optional<PersonalitySpec> personality;  // nullopt is BASELINE
  Language language = Language::kEn;
  std::string condition_id;

  ConditionKey Key() const;
  std::string PersonalityLabel() const;
};

PersonaCondition MakeCondition(PersonaGender gender, OccupationSpec occupation,
                               std::optional<PersonalitySpec> personality,
                               Language language);

// Catalog parsing. Each line mirrors the spec type; names (occupations) and
// (framework, trait, level) tuples must be unique, all strings non-empty,
// and slugs must not contain a framework token.
std::vector<OccupationSpec> ParseOccupations(const std::vector<JsonLine>& lines,
                                             std::string_view source);
std::vector<OccupationSpec> LoadOccupations(const std::filesystem::path& path);
std::vector<PersonalitySpec> ParsePersonalities(
    const std::vector<JsonLine>& lines, std::string_view source);
std::vector<PersonalitySpec> LoadPersonalities(const std::filesystem::path& path);

// Throws kValidation unless the catalogs have the shipped sizes.
void ValidateShippedCounts(const std::vector<OccupationSpec>& occupations,
                           const std::vector<PersonalitySpec>& personalities);

struct GridOptions {
  // Also emit neutral-gender rows for every personality condition.
  bool neutral_personality = false;
};

// Order: language (as given), occupation, then the three baselines
// (male, female, neutral) followed by personality x gender.
std::vector<PersonaCondition> BuildGrid(
    const std::vector<OccupationSpec>& occupations,
    const std::vector<PersonalitySpec>& personalities,
    const std::vector<Language>& languages, const GridOptions& options = {});

Json ToJson(const OccupationSpec& o);
Json ToJson(const PersonalitySpec& p);
Json ToJson(const PersonaCondition& c);
PersonaCondition ConditionFromJson(const Json& j);
std::vector<PersonaCondition> LoadGrid(const std::filesystem::path& path);
void WriteGrid(const std::filesystem::path& path,
               const std::vector<PersonaCondition>& grid);

// Rebuilds a condition from its id against the catalogs. Throws kNotFound
// when the occupation or personality is absent.
PersonaCondition ResolveCondition(
    std::string_view condition_id,
    const std::vector<OccupationSpec>& occupations,
    const std::vector<PersonalitySpec>& personalities);

std::string RenderPrompt(const PersonaCondition& condition);

// Short Dark Triad questionnaire.
enum class DarkTriadTrait { kMachiavellianism, kNarcissism, kPsychopathy };
std::string_view ToString(DarkTriadTrait t);
DarkTriadTrait ParseDarkTriadTrait(std::string_view s);

inline constexpr std::size_t kSd3ItemsPerTrait = 9;
using Sd3Scores = std::array<int, kSd3ItemsPerTrait>;
using Sd3Mask = std::array<bool, kSd3ItemsPerTrait>;

const std::array<std::string_view, kSd3ItemsPerTrait>& Sd3Items(DarkTriadTrait t);
Sd3Mask Sd3ReverseMask(DarkTriadTrait t);

struct Sd3Response {
  DarkTriadTrait trait = DarkTriadTrait::kMachiavellianism;
  Sd3Scores item_scores{};
  Sd3Mask reverse_mask{};
};

Sd3Response MakeSd3Response(DarkTriadTrait trait, const Sd3Scores& scores);
// Sum of (reverse ? 6 - x : x). Throws kInvalidArgument for x outside [1, 5].
int Sd3Total(const Sd3Scores& scores, const Sd3Mask& mask);
// Sd3Total after checking that the mask is the shipped one (kValidation).
int Sd3Score(const Sd3Response& response);

// Line format: {"trait": "...", "item_scores": [9 ints], "id"?: "..."}.
struct Sd3Record {
  std::string id;
  Sd3Response response;
};
std::vector<Sd3Record> LoadSd3Responses(const std::filesystem::path& path);

}  // namespace biasaudit

#endif  // BIASAUDIT_CORPUS_H_
