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

// biasaudit command-line entry point.

#include <algorithm>
#include <atomic>
#include <csignal>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "biasaudit/agreement.h"
#include "biasaudit/analysis.h"
#include "biasaudit/centroids.h"
#include "biasaudit/corpus.h"
#include "biasaudit/embedding.h"
#include "biasaudit/generation.h"
#include "biasaudit/lexicon.h"
#include "biasaudit/pipeline.h"
#include "biasaudit/scoring.h"
#include "biasaudit/version.h"

namespace ba = biasaudit;

namespace {

std::atomic<bool> g_interrupted{false};

void OnSignal(int) { g_interrupted = true; }

struct EmbedFlags {
  std::string config;
  std::string backend;
  std::string model_id;
  std::string endpoint;
  std::string cache;
  std::size_t dim = 0;
  std::int64_t seed = -1;
  std::size_t batch_size = 0;

  void Register(CLI::App* app) {
    app->add_option("--embed-config", config, "JSON embedding provider config");
    app->add_option("--backend", backend, "cache_only | remote_http | deterministic_test (default cache_only)");
    app->add_option("--model-id", model_id, "Embedding model identifier");
    app->add_option("--endpoint", endpoint, "Embed service base URL");
    app->add_option("--cache", cache, "Embedding cache file (line-JSON)");
    app->add_option("--dim", dim, "Dimension for deterministic_test");
    app->add_option("--seed", seed, "Seed for deterministic_test");
    app->add_option("--batch-size", batch_size, "Texts per backend request");
  }

  ba::EmbeddingProviderConfig Build() const {
    ba::Json j = config.empty() ? ba::Json::object() : ba::Json::parse(ba::ReadFile(config));
    if (!j.contains("backend")) j["backend"] = "cache_only";
    if (!backend.empty()) j["backend"] = backend;
    if (!model_id.empty()) j["model_id"] = model_id;
    if (!endpoint.empty()) j["endpoint"] = endpoint;
    if (!cache.empty()) j["cache_path"] = cache;
    if (dim > 0) j["dim"] = dim;
    if (seed >= 0) j["seed"] = static_cast<std::uint64_t>(seed);
    if (batch_size > 0) j["batch_size"] = batch_size;
    ba::EmbeddingProviderConfig c = ba::EmbeddingConfigFromJson(j);
    c.Validate();
    return c;
  }
};

void PrintJson(const ba::Json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<ba::Language> ParseLanguages(const std::string& csv) {
  std::vector<ba::Language> out;
  for (const auto& raw : ba::SplitString(csv, ',')) {
    const std::string s = ba::Trim(raw);
    if (s.empty()) continue;
    const ba::Language l = ba::ParseLanguage(s);
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  if (out.empty()) throw ba::Error(ba::ErrorCode::kInvalidArgument, "no languages given");
  return out;
}

std::vector<std::string> ReadTextField(const std::string& path) {
  std::vector<std::string> texts;
  for (const auto& line : ba::ReadJsonLines(path)) {
    if (!line.value.contains("text") || !line.value.at("text").is_string()) {
      throw ba::Error(ba::ErrorCode::kParse,
                      path + ":" + std::to_string(line.line_number) + ": missing \"text\"");
    }
    texts.push_back(line.value.at("text").get<std::string>());
  }
  return texts;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("biasaudit"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Persona-conditioned gender-stereotype bias audit"};
  app.set_version_flag("--version", ba::kVersion);
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  // lexicon expand
  auto* lexicon = app.add_subcommand("lexicon", "Stereotype lexicon tools");
  lexicon->require_subcommand(1);
  auto* expand = lexicon->add_subcommand("expand", "Expand a lexicon through sentence templates");
  std::string lex_path, templates_path, out_path;
  bool check_counts = false;
  expand->add_option("--lexicon", lex_path, "Lexicon line-JSON")->required();
  expand->add_option("--templates", templates_path, "Template line-JSON")->required();
  expand->add_option("--out", out_path, "Output sentence line-JSON")->required();
  expand->add_flag("--check-counts", check_counts, "Enforce the shipped per-side size band");

  // embed
  auto* embed = app.add_subcommand("embed", "Embed the \"text\" field of a line-JSON file into the cache");
  std::string embed_in;
  EmbedFlags embed_flags;
  embed->add_option("--in", embed_in, "Line-JSON with a \"text\" field")->required();
  embed_flags.Register(embed);

  // centroids
  auto* centroids = app.add_subcommand("centroids", "Gender centroid tools");
  centroids->require_subcommand(1);
  auto* cbuild = centroids->add_subcommand("build", "Build centroids from stereotype sentences");
  std::string sentences_path, language_name = "en";
  EmbedFlags cbuild_flags;
  cbuild->add_option("--sentences", sentences_path, "Sentence line-JSON")->required();
  cbuild->add_option("--language", language_name, "Language of the sentences");
  cbuild->add_option("--out", out_path, "Output centroid JSON")->required();
  cbuild_flags.Register(cbuild);
  auto* cweat = centroids->add_subcommand("weat", "WEAT-style effect size (noun targets, adjective/verb attributes)");
  EmbedFlags weat_flags;
  cweat->add_option("--sentences", sentences_path, "Sentence line-JSON")->required();
  weat_flags.Register(cweat);

  // score
  auto* score = app.add_subcommand("score", "Score stored artifacts against centroids");
  std::string stories_path, grid_path, aggregate_csv;
  std::vector<std::string> centroid_paths;
  bool redact = false;
  EmbedFlags score_flags;
  score->add_option("--stories", stories_path, "Artifact store line-JSON")->required();
  score->add_option("--centroids", centroid_paths, "Centroid JSON (one per language)")->required();
  score->add_option("--out", out_path, "Scored line-JSON")->required();
  score->add_option("--grid", grid_path, "Grid line-JSON, supplies occ_type");
  score->add_option("--aggregate", aggregate_csv, "Extra strategies: mean,trimmed_mean,top3_mean,median");
  score->add_flag("--redact", redact, "Omit sentence texts");
  score_flags.Register(score);

  // robustness
  auto* robustness = app.add_subcommand("robustness", "Compare aggregation strategies against max-abs");
  std::string scored_path;
  double trim = ba::kDefaultTrimFraction;
  robustness->add_option("--scored", scored_path, "Scored line-JSON")->required();
  robustness->add_option("--trim", trim, "Trimmed-mean fraction per tail");

  // stability
  auto* stability = app.add_subcommand("stability", "Mean pairwise cosine distance within each condition");
  EmbedFlags stability_flags;
  stability->add_option("--stories", stories_path, "Artifact store line-JSON")->required();
  stability_flags.Register(stability);

  // grid
  auto* grid = app.add_subcommand("grid", "Build the persona condition grid");
  std::string occ_path, pers_path, languages_csv = "en,hi";
  bool strict = false, neutral_personality = false;
  grid->add_option("--occupations", occ_path, "Occupation catalog")->required();
  grid->add_option("--personalities", pers_path, "Personality catalog")->required();
  grid->add_option("--languages", languages_csv, "Comma-separated languages");
  grid->add_option("--out", out_path, "Grid line-JSON")->required();
  grid->add_flag("--strict", strict, "Require the shipped catalog sizes");
  grid->add_flag("--neutral-personality", neutral_personality, "Also pair neutral gender with personalities");

  // sd3
  auto* sd3 = app.add_subcommand("sd3", "Short Dark Triad questionnaire");
  sd3->require_subcommand(1);
  auto* sd3_score = sd3->add_subcommand("score", "Score SD3 responses");
  std::string responses_path;
  sd3_score->add_option("--responses", responses_path, "Response line-JSON")->required();

  // generate
  auto* generate = app.add_subcommand("generate", "Generate artifacts for a grid");
  std::string provider_name, model_name, transcripts_path, endpoint;
  ba::GenerationParams gen_params;
  std::size_t workers = 1;
  double rate = 2.0;
  generate->add_option("--grid", grid_path, "Grid line-JSON")->required();
  generate->add_option("--provider", provider_name, "transcript, or a chat provider id (e.g. openai)")->required();
  generate->add_option("--model", model_name, "Model name")->required();
  generate->add_option("--out", out_path, "Artifact store line-JSON")->required();
  generate->add_option("--temperature", gen_params.temperature, "Sampling temperature");
  generate->add_option("--top-p", gen_params.top_p, "Nucleus sampling mass");
  generate->add_option("--max-retries", gen_params.max_retries, "Re-generations after a QC failure");
  generate->add_flag("--provider-defaults", gen_params.provider_defaults, "Send no sampling parameters");
  generate->add_option("--workers", workers, "Concurrent conditions");
  generate->add_option("--transcripts", transcripts_path, "Transcript file for the transcript provider");
  generate->add_option("--endpoint", endpoint, "Chat-completions base URL");
  generate->add_option("--rate", rate, "Requests per second");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Fit the regression and export tables");
  std::string spec_path, out_dir, stratify;
  std::size_t bins = 20;
  std::string group_by_csv = "model,language,has_personality";
  bool occupation_fe = false;
  analyze->add_option("--scored", scored_path, "Scored line-JSON")->required();
  analyze->add_option("--spec", spec_path, "Regression spec JSON");
  analyze->add_option("--out-dir", out_dir, "Output directory")->required();
  analyze->add_option("--stratify", stratify, "Also fit per level of this factor (gender, language)");
  analyze->add_option("--bins", bins, "Histogram bins");
  analyze->add_option("--group-by", group_by_csv, "Summary grouping keys");
  analyze->add_flag("--occupation-fe", occupation_fe, "Add per-occupation fixed effects");

  // agree
  auto* agree = app.add_subcommand("agree", "Inter-annotator agreement and detection rate");
  std::string annotations_path, by;
  agree->add_option("--annotations", annotations_path, "Annotation line-JSON")->required();
  agree->add_option("--by", by, "Subgroup key (gender)")->check(CLI::IsMember({"gender"}));
  agree->add_option("--language", language_name, "Language of the annotated stories");

  // run
  auto* run = app.add_subcommand("run", "Run pipeline stages from a config file");
  std::string config_path, stages_csv = "all";
  std::int64_t run_seed = -1;
  std::size_t run_workers = 0;
  run->add_option("--config", config_path, "Pipeline config JSON")->required();
  run->add_option("--stages", stages_csv, "Comma-separated stages or 'all'");
  run->add_option("--out-dir", out_dir, "Override config out_dir");
  run->add_option("--seed", run_seed, "Override config seed");
  run->add_option("--workers", run_workers, "Override generation workers");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (expand->parsed()) {
      const auto lex = ba::LoadLexicon(lex_path);
      if (check_counts) ba::ValidateDefaultLexiconCounts(lex);
      const auto sentences = ba::ExpandTemplates(lex, ba::LoadTemplates(templates_path));
      ba::WriteSentences(out_path, sentences);
      std::size_t male = 0;
      for (const auto& s : sentences) male += s.gender == ba::Gender::kMale;
      PrintJson({{"language", ba::ToString(lex.language)}, {"lexicon_version", lex.version},
                 {"male", male}, {"female", sentences.size() - male}});
    } else if (embed->parsed()) {
      ba::EmbeddingProvider provider(embed_flags.Build());
      const auto texts = ReadTextField(embed_in);
      provider.EmbedBatch(texts);
      PrintJson({{"texts", texts.size()}, {"backend_requests", provider.backend_texts_requested()}});
    } else if (cbuild->parsed()) {
      const auto sentences = ba::LoadSentences(sentences_path);
      const ba::Language lang = ba::ParseLanguage(language_name);
      ba::EmbeddingProvider provider(cbuild_flags.Build());
      std::vector<std::string> male, female;
      for (const auto& s : sentences) {
        if (s.language != lang) {
          throw ba::Error(ba::ErrorCode::kValidation, "sentence '" + s.text + "' is not " + language_name);
        }
        (s.gender == ba::Gender::kMale ? male : female).push_back(s.text);
      }
      auto c = ba::BuildCentroids(provider.EmbedBatch(male), provider.EmbedBatch(female));
      c.language = lang;
      c.model_id = provider.config().model_id;
      ba::SaveCentroids(out_path, c);
      PrintJson({{"n_male", c.n_male}, {"n_female", c.n_female}, {"dim", c.dim()}});
    } else if (cweat->parsed()) {
      const auto sentences = ba::LoadSentences(sentences_path);
      ba::EmbeddingProvider provider(weat_flags.Build());
      std::map<ba::Gender, std::vector<std::string>> targets, attrs;
      std::map<ba::Gender, std::set<std::string>> seen;
      for (const auto& s : sentences) {
        if (s.pos == ba::PartOfSpeech::kNoun) {
          if (seen[s.gender].insert(s.source_word).second) targets[s.gender].push_back(s.source_word);
        } else {
          attrs[s.gender].push_back(s.text);
        }
      }
      for (ba::Gender g : {ba::Gender::kMale, ba::Gender::kFemale}) {
        if (targets[g].empty() || attrs[g].empty()) {
          throw ba::Error(ba::ErrorCode::kEmptyInput,
                          "need noun targets and adjective/verb attributes on both sides");
        }
      }
      PrintJson(ba::ToJson(ba::WeatEffectSize(
          provider.EmbedBatch(targets[ba::Gender::kMale]), provider.EmbedBatch(targets[ba::Gender::kFemale]),
          provider.EmbedBatch(attrs[ba::Gender::kMale]), provider.EmbedBatch(attrs[ba::Gender::kFemale]))));
    } else if (score->parsed()) {
      std::map<ba::Language, ba::GenderCentroids> cents;
      for (const auto& p : centroid_paths) {
        auto c = ba::LoadCentroids(p);
        if (!cents.emplace(c.language, c).second) {
          throw ba::Error(ba::ErrorCode::kValidation, "two centroid files for one language: " + p);
        }
      }
      std::map<std::string, ba::Gender> occ_type;
      if (!grid_path.empty()) {
        for (const auto& c : ba::LoadGrid(grid_path)) occ_type[c.condition_id] = c.occupation.stereotype;
      }
      std::vector<ba::AggregationStrategy> strategies = {ba::AggregationStrategy::kMaxAbs};
      for (const auto& s : ba::SplitString(aggregate_csv, ',')) {
        if (!ba::Trim(s).empty()) strategies.push_back(ba::ParseAggregationStrategy(ba::Trim(s)));
      }
      ba::EmbeddingProvider provider(score_flags.Build());
      auto artifacts = ba::LoadArtifacts(stories_path);
      std::sort(artifacts.begin(), artifacts.end(),
                [](const auto& a, const auto& b) { return a.story_id < b.story_id; });
      std::vector<ba::ScoredStory> scored;
      std::size_t skipped = 0;
      for (const auto& a : artifacts) {
        if (!a.qc.passed) {
          ++skipped;
          continue;
        }
        const ba::ConditionKey key = ba::ParseConditionId(a.condition_id);
        auto it = cents.find(key.language);
        if (it == cents.end()) {
          throw ba::Error(ba::ErrorCode::kDependency, "no centroids supplied for language '" +
                                                          std::string(ba::ToString(key.language)) + "'");
        }
        auto s = ba::ScoreStory(a.story_id, ba::SegmentSentences(a.text, key.language), key.language,
                                it->second, provider, strategies);
        s.condition_id = a.condition_id;
        s.condition = key;
        s.model = a.model_name;
        if (auto o = occ_type.find(a.condition_id); o != occ_type.end()) s.occ_type = o->second;
        scored.push_back(std::move(s));
      }
      ba::WriteScoredStories(out_path, scored, redact);
      PrintJson({{"scored", scored.size()}, {"skipped_failed_qc", skipped}});
    } else if (robustness->parsed()) {
      PrintJson(ba::ToJson(ba::CompareAggregators(ba::LoadScoredStories(scored_path), trim)));
    } else if (stability->parsed()) {
      ba::EmbeddingProvider provider(stability_flags.Build());
      std::map<std::string, std::vector<std::string>> groups;
      for (const auto& a : ba::LoadArtifacts(stories_path)) {
        if (a.qc.passed) groups[a.condition_id].push_back(a.text);
      }
      ba::Json per = ba::Json::object();
      double sum = 0.0;
      std::size_t n = 0;
      for (auto& [id, texts] : groups) {
        if (texts.size() < 2) continue;
        const double d = ba::StabilityCheck(texts, provider);
        per[id] = d;
        sum += d;
        ++n;
      }
      if (n == 0) {
        throw ba::Error(ba::ErrorCode::kEmptyInput, "no condition has two or more passed stories");
      }
      PrintJson({{"mean_pairwise_cosine_distance", sum / static_cast<double>(n)}, {"groups", n},
                 {"per_condition", per}});
    } else if (grid->parsed()) {
      const auto occ = ba::LoadOccupations(occ_path);
      const auto pers = ba::LoadPersonalities(pers_path);
      if (strict) ba::ValidateShippedCounts(occ, pers);
      ba::GridOptions options;
      options.neutral_personality = neutral_personality;
      const auto conditions = ba::BuildGrid(occ, pers, ParseLanguages(languages_csv), options);
      ba::WriteGrid(out_path, conditions);
      std::size_t baseline = 0;
      for (const auto& c : conditions) baseline += !c.personality.has_value();
      PrintJson({{"conditions", conditions.size()}, {"baseline", baseline}});
    } else if (sd3_score->parsed()) {
      for (const auto& r : ba::LoadSd3Responses(responses_path)) {
        std::cout << ba::Json{{"id", r.id}, {"trait", ba::ToString(r.response.trait)},
                              {"score", ba::Sd3Score(r.response)}, {"max", 45}}
                         .dump()
                  << "\n";
      }
    } else if (generate->parsed()) {
      std::unique_ptr<ba::TextProvider> provider;
      if (provider_name == "transcript") {
        if (transcripts_path.empty()) {
          throw ba::Error(ba::ErrorCode::kInvalidArgument, "--transcripts is required for the transcript provider");
        }
        provider = std::make_unique<ba::TranscriptProvider>(std::filesystem::path(transcripts_path));
      } else {
        ba::HttpChatConfig hc;
        hc.provider_id = provider_name;
        hc.endpoint = endpoint;
        hc.requests_per_second = rate;
        provider = std::make_unique<ba::HttpChatProvider>(hc);
      }
      gen_params.provider_id = provider_name;
      gen_params.model_name = model_name;
      const auto conditions = ba::LoadGrid(grid_path);
      ba::ArtifactStore store(out_path);
      ba::BatchOptions options;
      options.workers = workers;
      options.cancel = &g_interrupted;
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      const auto report = ba::RunBatch(conditions, gen_params, *provider, store, options);
      PrintJson(ba::ToJson(report));
      if (report.cancelled) return 130;
    } else if (analyze->parsed()) {
      ba::RegressionSpec spec = spec_path.empty() ? ba::RegressionSpec{} : ba::LoadRegressionSpec(spec_path);
      const auto stories = ba::LoadScoredStories(scored_path);
      if (occupation_fe) spec.predictors.push_back("occupation");
      const auto records = ba::RecordsFromScored(stories, occupation_fe);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      ba::Json out = ba::Json::object();
      const auto fit = ba::FitModel(records, spec);
      ba::WriteFileAtomic(dir / "coefficients.csv", ba::CoefficientsCsv(fit));
      out["pooled"] = ba::ToJson(fit);
      if (!stratify.empty()) {
        const auto fits = ba::FitStratified(records, spec, stratify);
        ba::WriteFileAtomic(dir / ("coefficients_by_" + stratify + ".csv"),
                            ba::StratifiedCoefficientsCsv(stratify, fits));
        for (const auto& [level, f] : fits) out[stratify + "=" + level] = ba::ToJson(f);
      }
      std::vector<std::string> group_by;
      for (const auto& g : ba::SplitString(group_by_csv, ',')) {
        if (!ba::Trim(g).empty()) group_by.push_back(ba::Trim(g));
      }
      ba::WriteFileAtomic(dir / "summary.csv", ba::SummaryCsv(ba::Summarize(records, group_by), group_by));
      const auto h = ba::ExportDistribution(ba::OutcomeVector(records), bins);
      ba::WriteFileAtomic(dir / "histogram.csv", ba::HistogramCsv(h));
      out["histogram_degenerate"] = h.degenerate;
      PrintJson(out);
    } else if (agree->parsed()) {
      const auto set = ba::LoadAnnotations(annotations_path, ba::ParseLanguage(language_name));
      PrintJson(ba::ToJson(ba::ComputeAgreement(set, by == "gender")));
    } else if (run->parsed()) {
      ba::PipelineConfig config = ba::LoadPipelineConfig(config_path);
      if (!out_dir.empty()) config.out_dir = std::filesystem::absolute(out_dir);
      if (run_seed >= 0) {
        config.seed = static_cast<std::uint64_t>(run_seed);
        config.embedding.seed = config.seed;
      }
      if (run_workers > 0) config.generation.workers = run_workers;
      const auto result = ba::RunPipeline(config, ba::ParseStages(stages_csv));
      ba::Json summary = ba::Json::object();
      for (const auto& [stage, s] : result.stage_summaries) summary[stage] = s;
      PrintJson(summary);
    }
  } catch (const ba::Error& e) {
    std::cerr << "error [" << ba::ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
