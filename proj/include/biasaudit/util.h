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

#ifndef BIASAUDIT_UTIL_H_
#define BIASAUDIT_UTIL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace biasaudit {

using Json = nlohmann::json;

std::array<std::uint8_t, 32> Sha256(std::string_view data);
std::string Sha256Hex(std::string_view data);
std::string Sha256FileHex(const std::filesystem::path& path);

// Lossy UTF-8 decoder: malformed sequences become U+FFFD, never throws.
std::u32string DecodeUtf8(std::string_view text);
std::string EncodeUtf8(std::u32string_view text);

bool IsUnicodeSpace(char32_t c);
std::string Trim(std::string_view s);
// Collapses runs of ASCII spaces into one.
std::string CollapseSpaces(std::string_view s);

// Lowercase ASCII, alphanumerics kept, everything else folded into single
// hyphens: "Priest (Pandit)" -> "priest-pandit".
std::string Slugify(std::string_view s);

std::vector<std::string> SplitString(std::string_view s, char sep);

std::string ReadFile(const std::filesystem::path& path);
// Writes to a sibling temp file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view content);

struct JsonLine {
  std::size_t line_number = 0;  // 1-based
  Json value;
};

// Blank lines are skipped. A malformed line throws Error(kParse) naming
// the file and line number.
std::vector<JsonLine> ReadJsonLines(const std::filesystem::path& path);

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string NowIso8601();

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double v);

}  // namespace biasaudit

#endif  // BIASAUDIT_UTIL_H_
