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

#ifndef BIASAUDIT_TYPES_H_
#define BIASAUDIT_TYPES_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace biasaudit {

enum class ErrorCode {
  kParse,
  kValidation,
  kInvalidArgument,
  kNotFound,
  kIo,
  kEmptyInput,
  kDimensionMismatch,
  kZeroVector,
  kCacheMiss,
  kTransport,
  kAuthentication,
  kDegenerate,
  kRankDeficient,
  kUnderdetermined,
  kThinStratum,
  kTie,
  kCoverage,
  kDependency,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as Error; the code lets callers and
// tests distinguish failure classes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class Language { kEn, kHi };
enum class Gender { kMale, kFemale };
enum class PersonaGender { kMale, kFemale, kNeutral };
enum class PartOfSpeech { kNoun, kVerb, kAdjective };

std::string_view ToString(Language lang);
std::string_view ToString(Gender gender);
std::string_view ToString(PersonaGender gender);
std::string_view ToString(PartOfSpeech pos);

// Display name used inside generation prompts ("English", "Hindi").
std::string_view LanguageDisplayName(Language lang);

// Parsers throw Error(kParse) on unknown values.
Language ParseLanguage(std::string_view s);
Gender ParseGender(std::string_view s);
PersonaGender ParsePersonaGender(std::string_view s);
PartOfSpeech ParsePartOfSpeech(std::string_view s);

}  // namespace biasaudit

#endif  // BIASAUDIT_TYPES_H_
