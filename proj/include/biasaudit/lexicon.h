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

#ifndef BIASAUDIT_LEXICON_H_
#define BIASAUDIT_LEXICON_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/types.h"
#include "biasaudit/util.h"

namespace biasaudit {

struct LexiconEntry {
  std::string surface;
  PartOfSpeech pos = PartOfSpeech::kNoun;
  Gender gender = Gender::kMale;
  Language language = Language::kEn;
  std::optional<std::string> gloss;  // English gloss for Hindi items
};

// Gendered stereotype word list for a single language.
struct StereotypeLexicon {
  std::vector<LexiconEntry> entries;
  Language language = Language::kEn;
  std::string version;

  std::size_t Count(Gender gender) const;
};

struct SentenceTemplate {
  std::string id;
  std::string pattern;  // exactly one "_" slot
  PartOfSpeech pos = PartOfSpeech::kNoun;
  Language language = Language::kEn;

  std::string Fill(std::string_view word) const;
};

struct StereotypeSentence {
  std::string text;
  std::string source_word;
  Gender gender = Gender::kMale;
  Language language = Language::kEn;
  PartOfSpeech pos = PartOfSpeech::kNoun;
  std::string template_id;
};

// Shipped lexicons hold roughly 200 items per side; anything outside this
// band signals a truncated or mis-transcribed data file.
inline constexpr std::size_t kMinDefaultSideCount = 150;
inline constexpr std::size_t kMaxDefaultSideCount = 300;

// Parses line-JSON lexicon content. Errors name `source` and the line.
StereotypeLexicon ParseLexicon(std::string_view content,
                               std::string_view source);
StereotypeLexicon LoadLexicon(const std::filesystem::path& path);

// Checks the per-side size band expected of the shipped default files.
void ValidateDefaultLexiconCounts(const StereotypeLexicon& lexicon);

// Throws Error(kValidation) unless the pattern has exactly one slot and
// non-empty text around it.
SentenceTemplate MakeTemplate(std::string id, std::string pattern,
                              PartOfSpeech pos, Language language);
std::vector<SentenceTemplate> ParseTemplates(std::string_view content,
                                             std::string_view source);
std::vector<SentenceTemplate> LoadTemplates(const std::filesystem::path& path);

// Output order is lexicon order, then template order. Throws
// Error(kValidation) listing every (pos, language) pair that has entries but
// no template.
std::vector<StereotypeSentence> ExpandTemplates(
    const StereotypeLexicon& lexicon,
    std::span<const SentenceTemplate> templates);

Json ToJson(const LexiconEntry& entry);
Json ToJson(const StereotypeSentence& sentence);
StereotypeSentence SentenceFromJson(const Json& j);
std::vector<StereotypeSentence> LoadSentences(
    const std::filesystem::path& path);
void WriteSentences(const std::filesystem::path& path,
                    std::span<const StereotypeSentence> sentences);

}  // namespace biasaudit

#endif  // BIASAUDIT_LEXICON_H_
