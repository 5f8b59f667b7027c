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

#include "biasaudit/lexicon.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

namespace biasaudit {
namespace {

std::string Where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

std::string RequireString(const Json& j, const char* key,
                          std::string_view where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::kValidation, std::string(where) +
                                            ": missing string field '" + key +
                                            "'");
  }
  return it->get<std::string>();
}

template <typename Fn>
auto ParseField(Fn&& fn, std::string_view where) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, std::string(where) + ": " + e.what());
  }
}

std::vector<JsonLine> ParseLines(std::string_view content,
                                 std::string_view source) {
  std::vector<JsonLine> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    try {
      out.push_back({lineno, Json::parse(line)});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse, Where(source, lineno) + ": " + e.what());
    }
    if (!out.back().value.is_object()) {
      throw Error(ErrorCode::kParse,
                  Where(source, lineno) + ": expected a JSON object");
    }
  }
  return out;
}

}  // namespace

std::size_t StereotypeLexicon::Count(Gender gender) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(),
                    [&](const LexiconEntry& e) { return e.gender == gender; }));
}

std::string SentenceTemplate::Fill(std::string_view word) const {
  const std::size_t slot = pattern.find('_');
  std::string out = pattern.substr(0, slot);
  out += word;
  out += pattern.substr(slot + 1);
  return out;
}

StereotypeLexicon ParseLexicon(std::string_view content,
                               std::string_view source) {
  StereotypeLexicon lexicon;
  lexicon.version = "sha256:" + Sha256Hex(content).substr(0, 16);
  std::set<std::tuple<std::string, PartOfSpeech, Gender, Language>> seen;
  bool have_language = false;
  for (const JsonLine& line : ParseLines(content, source)) {
    const std::string where = Where(source, line.line_number);
    const Json& j = line.value;
    LexiconEntry entry;
    entry.surface = Trim(RequireString(j, "surface", where));
    if (entry.surface.empty()) {
      throw Error(ErrorCode::kValidation, where + ": empty surface");
    }
    entry.pos = ParseField(
        [&] { return ParsePartOfSpeech(RequireString(j, "pos", where)); },
        where);
    entry.gender = ParseField(
        [&] { return ParseGender(RequireString(j, "gender", where)); }, where);
    entry.language = ParseField(
        [&] { return ParseLanguage(RequireString(j, "language", where)); },
        where);
    if (auto it = j.find("gloss"); it != j.end() && it->is_string()) {
      entry.gloss = it->get<std::string>();
    }
    if (!have_language) {
      lexicon.language = entry.language;
      have_language = true;
    } else if (entry.language != lexicon.language) {
      throw Error(ErrorCode::kValidation,
                  where + ": language '" + std::string(ToString(entry.language)) +
                      "' differs from lexicon language '" +
                      std::string(ToString(lexicon.language)) + "'");
    }
    if (!seen.emplace(entry.surface, entry.pos, entry.gender, entry.language)
             .second) {
      throw Error(ErrorCode::kValidation,
                  where + ": duplicate entry (\"" + entry.surface + "\", " +
                      std::string(ToString(entry.pos)) + ", " +
                      std::string(ToString(entry.gender)) + ", " +
                      std::string(ToString(entry.language)) + ")");
    }
    lexicon.entries.push_back(std::move(entry));
  }
  return lexicon;
}

StereotypeLexicon LoadLexicon(const std::filesystem::path& path) {
  return ParseLexicon(ReadFile(path), path.string());
}

void ValidateDefaultLexiconCounts(const StereotypeLexicon& lexicon) {
  for (Gender g : {Gender::kMale, Gender::kFemale}) {
    const std::size_t n = lexicon.Count(g);
    if (n < kMinDefaultSideCount || n > kMaxDefaultSideCount) {
      throw Error(ErrorCode::kValidation,
                  std::string(ToString(g)) + " side of the " +
                      std::string(ToString(lexicon.language)) +
                      " lexicon has " + std::to_string(n) +
                      " entries, expected [" +
                      std::to_string(kMinDefaultSideCount) + ", " +
                      std::to_string(kMaxDefaultSideCount) + "]");
    }
  }
}

SentenceTemplate MakeTemplate(std::string id, std::string pattern,
                              PartOfSpeech pos, Language language) {
  const auto slots = std::count(pattern.begin(), pattern.end(), '_');
  if (slots != 1) {
    throw Error(ErrorCode::kValidation,
                "template '" + id + "' must contain exactly one '_' slot, has " +
                    std::to_string(slots));
  }
  std::string rest = pattern;
  rest.erase(rest.find('_'), 1);
  if (Trim(rest).empty()) {
    throw Error(ErrorCode::kValidation,
                "template '" + id + "' is empty apart from its slot");
  }
  return SentenceTemplate{std::move(id), std::move(pattern), pos, language};
}

std::vector<SentenceTemplate> ParseTemplates(std::string_view content,
                                             std::string_view source) {
  std::vector<SentenceTemplate> out;
  std::set<std::string> ids;
  for (const JsonLine& line : ParseLines(content, source)) {
    const std::string where = Where(source, line.line_number);
    const Json& j = line.value;
    std::string id = RequireString(j, "id", where);
    if (!ids.insert(id).second) {
      throw Error(ErrorCode::kValidation,
                  where + ": duplicate template id '" + id + "'");
    }
    const auto pos = ParseField(
        [&] { return ParsePartOfSpeech(RequireString(j, "pos", where)); },
        where);
    const auto lang = ParseField(
        [&] { return ParseLanguage(RequireString(j, "language", where)); },
        where);
    out.push_back(ParseField(
        [&] {
          return MakeTemplate(id, RequireString(j, "pattern", where), pos,
                              lang);
        },
        where));
  }
  return out;
}

std::vector<SentenceTemplate> LoadTemplates(
    const std::filesystem::path& path) {
  return ParseTemplates(ReadFile(path), path.string());
}

std::vector<StereotypeSentence> ExpandTemplates(
    const StereotypeLexicon& lexicon,
    std::span<const SentenceTemplate> templates) {
  if (templates.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "template list is empty");
  }
  std::set<std::pair<PartOfSpeech, Language>> covered;
  for (const auto& t : templates) covered.emplace(t.pos, t.language);

  std::set<std::pair<PartOfSpeech, Language>> missing;
  for (const auto& e : lexicon.entries) {
    if (!covered.count({e.pos, e.language})) missing.emplace(e.pos, e.language);
  }
  if (!missing.empty()) {
    std::string msg = "no template for";
    for (const auto& [pos, lang] : missing) {
      msg += " (" + std::string(ToString(pos)) + ", " +
             std::string(ToString(lang)) + ")";
    }
    throw Error(ErrorCode::kValidation, msg);
  }

  std::vector<StereotypeSentence> out;
  for (const auto& e : lexicon.entries) {
    for (const auto& t : templates) {
      if (t.pos != e.pos || t.language != e.language) continue;
      out.push_back(StereotypeSentence{t.Fill(e.surface), e.surface, e.gender,
                                       e.language, e.pos, t.id});
    }
  }
  return out;
}

Json ToJson(const LexiconEntry& entry) {
  Json j = {{"surface", entry.surface},
            {"pos", ToString(entry.pos)},
            {"gender", ToString(entry.gender)},
            {"language", ToString(entry.language)}};
  if (entry.gloss) j["gloss"] = *entry.gloss;
  return j;
}

Json ToJson(const StereotypeSentence& s) {
  return Json{{"text", s.text},
              {"source_word", s.source_word},
              {"gender", ToString(s.gender)},
              {"language", ToString(s.language)},
              {"pos", ToString(s.pos)},
              {"template_id", s.template_id}};
}

StereotypeSentence SentenceFromJson(const Json& j) {
  StereotypeSentence s;
  s.text = j.at("text").get<std::string>();
  s.source_word = j.value("source_word", std::string());
  s.gender = ParseGender(j.at("gender").get<std::string>());
  s.language = ParseLanguage(j.at("language").get<std::string>());
  s.pos = ParsePartOfSpeech(j.value("pos", std::string("noun")));
  s.template_id = j.value("template_id", std::string());
  return s;
}

std::vector<StereotypeSentence> LoadSentences(
    const std::filesystem::path& path) {
  std::vector<StereotypeSentence> out;
  for (const JsonLine& line : ReadJsonLines(path)) {
    try {
      out.push_back(SentenceFromJson(line.value));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" +
                                         std::to_string(line.line_number) +
                                         ": " + e.what());
    }
  }
  return out;
}

void WriteSentences(const std::filesystem::path& path,
                    std::span<const StereotypeSentence> sentences) {
  std::string content;
  for (const auto& s : sentences) {
    content += ToJson(s).dump();
    content.push_back('\n');
  }
  WriteFileAtomic(path, content);
}

}  // namespace biasaudit
