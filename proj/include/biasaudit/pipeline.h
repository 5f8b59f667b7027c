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

#ifndef BIASAUDIT_PIPELINE_H_
#define BIASAUDIT_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/analysis.h"
#include "biasaudit/corpus.h"
#include "biasaudit/embedding.h"
#include "biasaudit/generation.h"
#include "biasaudit/types.h"
#include "biasaudit/util.h"

namespace biasaudit {

enum class Stage { kExpand, kEmbed, kCentroids, kGrid, kGenerate, kScore, kAnalyze, kAgree, kReport };

std::string_view ToString(Stage s);
const std::vector<Stage>& AllStages();
// Comma-separated stage names; "all" selects every stage. Result is in
// canonical order without duplicates.
std::vector<Stage> ParseStages(std::string_view csv);

struct GenerationConfig {
  std::string provider = "transcript";  // "transcript" or "http"
  std::optional<std::filesystem::path> transcripts;
  HttpChatConfig http;
  std::vector<std::string> models;
  GenerationParams params;
  std::size_t workers = 1;
};

struct AnalysisConfig {
  RegressionSpec spec;
  std::vector<std::string> stratify = {"gender", "language"};
  std::vector<std::string> summary_group_by = {"model", "language", "has_personality"};
  std::size_t histogram_bins = 20;
  bool occupation_fixed_effects = false;
};

struct AnnotationConfig {
  std::filesystem::path path;
  Language language = Language::kEn;
  bool by_gender = true;
};

// Relative paths in the config file resolve against the file's directory.
struct PipelineConfig {
  std::filesystem::path base_dir;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::vector<Language> languages = {Language::kEn, Language::kHi};
  std::map<Language, std::filesystem::path> lexicons;
  std::filesystem::path templates;
  std::filesystem::path occupations;
  std::filesystem::path personalities;
  bool strict_catalogs = false;
  bool check_lexicon_counts = false;
  GridOptions grid;
  EmbeddingProviderConfig embedding;
  GenerationConfig generation;
  AnalysisConfig analysis;
  std::optional<AnnotationConfig> annotations;

  // Throws kValidation with a field path ("config.lexicons.hi: ...").
  void Validate() const;
};

PipelineConfig PipelineConfigFromJson(const Json& j, const std::filesystem::path& base_dir);
PipelineConfig LoadPipelineConfig(const std::filesystem::path& path);

// Files written under out_dir.
struct PipelineLayout {
  std::filesystem::path out_dir;

  std::filesystem::path Sentences(Language l) const;
  std::filesystem::path Centroids(Language l) const;
  std::filesystem::path Grid() const { return out_dir / "grid.jsonl"; }
  std::filesystem::path Artifacts() const { return out_dir / "artifacts.jsonl"; }
  std::filesystem::path Scored() const { return out_dir / "scored.jsonl"; }
  std::filesystem::path ReportDir() const { return out_dir / "report"; }
};

struct PipelineResult {
  std::vector<Stage> stages_run;
  std::map<std::string, Json> stage_summaries;
};

// Runs the selected stages in canonical order. A stage whose upstream file
// is missing throws kDependency naming that file.
PipelineResult RunPipeline(const PipelineConfig& config, const std::vector<Stage>& stages);

}  // namespace biasaudit

#endif  // BIASAUDIT_PIPELINE_H_
