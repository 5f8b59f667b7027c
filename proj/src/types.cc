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

#include "biasaudit/types.h"

#include <string>

namespace biasaudit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kZeroVector: return "zero_vector";
    case ErrorCode::kCacheMiss: return "cache_miss";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kAuthentication: return "authentication";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kRankDeficient: return "rank_deficient";
    case ErrorCode::kUnderdetermined: return "underdetermined";
    case ErrorCode::kThinStratum: return "thin_stratum";
    case ErrorCode::kTie: return "tie";
    case ErrorCode::kCoverage: return "coverage";
    case ErrorCode::kDependency: return "dependency";
  }
  return "unknown";
}

std::string_view ToString(Language lang) {
  return lang == Language::kEn ? "en" : "hi";
}

std::string_view ToString(Gender gender) {
  return gender == Gender::kMale ? "male" : "female";
}

std::string_view ToString(PersonaGender gender) {
  switch (gender) {
    case PersonaGender::kMale: return "male";
    case PersonaGender::kFemale: return "female";
    case PersonaGender::kNeutral: return "neutral";
  }
  return "neutral";
}

std::string_view ToString(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::kNoun: return "noun";
    case PartOfSpeech::kVerb: return "verb";
    case PartOfSpeech::kAdjective: return "adjective";
  }
  return "noun";
}

std::string_view LanguageDisplayName(Language lang) {
  return lang == Language::kEn ? "English" : "Hindi";
}

Language ParseLanguage(std::string_view s) {
  if (s == "en") return Language::kEn;
  if (s == "hi") return Language::kHi;
  throw Error(ErrorCode::kParse, "unknown language '" + std::string(s) + "'");
}

Gender ParseGender(std::string_view s) {
  if (s == "male") return Gender::kMale;
  if (s == "female") return Gender::kFemale;
  throw Error(ErrorCode::kParse, "unknown gender '" + std::string(s) + "'");
}

PersonaGender ParsePersonaGender(std::string_view s) {
  if (s == "male") return PersonaGender::kMale;
  if (s == "female") return PersonaGender::kFemale;
  if (s == "neutral") return PersonaGender::kNeutral;
  throw Error(ErrorCode::kParse,
              "unknown persona gender '" + std::string(s) + "'");
}

PartOfSpeech ParsePartOfSpeech(std::string_view s) {
  if (s == "noun") return PartOfSpeech::kNoun;
  if (s == "verb") return PartOfSpeech::kVerb;
  if (s == "adjective") return PartOfSpeech::kAdjective;
  throw Error(ErrorCode::kParse,
              "unknown part of speech '" + std::string(s) + "'");
}

}  // namespace biasaudit
