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

#include "biasaudit/pipeline.h"

#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "biasaudit/agreement.h"
#include "biasaudit/centroids.h"
#include "biasaudit/lexicon.h"
#include "biasaudit/scoring.h"
#include "biasaudit/version.h"

namespace biasaudit {
namespace {

const std::vector<Stage> kAllStages = {
    Stage::kExpand, Stage::kEmbed,   Stage::kCentroids, Stage::kGrid,  Stage::kGenerate,
    Stage::kScore,  Stage::kAnalyze, Stage::kAgree,     Stage::kReport};

Error ConfigError(const std::string& field, const std::string& what) {
  return Error(ErrorCode::kValidation, "config." + field + ": " + what);
}

void RequireFile(const std::string& field, const std::filesystem::path& p) {
  if (p.empty()) throw ConfigError(field, "is required");
  if (!std::filesystem::is_regular_file(p)) {
    throw ConfigError(field, "file not found: " + p.string());
  }
}

void RequireUpstream(Stage stage, const std::filesystem::path& p, std::string_view producer) {
  if (!std::filesystem::exists(p)) {
    throw Error(ErrorCode::kDependency, "stage '" + std::string(ToString(stage)) +
                                            "' needs " + p.string() + " (produced by stage '" +
                                            std::string(producer) + "')");
  }
}

template <typename T>
T Field(const Json& j, const char* key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(path + key, e.what());
  }
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string Relative(const std::filesystem::path& p, const std::filesystem::path& base) {
  const auto rel = p.lexically_relative(base);
  return (rel.empty() ? p : rel).generic_string();
}

std::vector<StereotypeSentence> SentencesWhere(const std::vector<StereotypeSentence>& all,
                                               Gender g, bool nouns) {
  std::vector<StereotypeSentence> out;
  for (const auto& s : all) {
    if (s.gender != g) continue;
    if (nouns != (s.pos == PartOfSpeech::kNoun)) continue;
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> Texts(const std::vector<StereotypeSentence>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.text);
  return out;
}

// Noun surfaces in first-appearance order.
std::vector<std::string> NounTargets(const std::vector<StereotypeSentence>& all, Gender g) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : all) {
    if (s.gender == g && s.pos == PartOfSpeech::kNoun && seen.insert(s.source_word).second) {
      out.push_back(s.source_word);
    }
  }
  return out;
}

class Runner {
 public:
  explicit Runner(const PipelineConfig& config)
      : config_(config), layout_{config.out_dir}, embedder_([&] {
          EmbeddingProviderConfig e = config.embedding;
          if (!e.cache_path) e.cache_path = config.out_dir / "embeddings.jsonl";
          return e;
        }()) {}

  Json Run(Stage stage) {
    switch (stage) {
      case Stage::kExpand: return Expand();
      case Stage::kEmbed: return Embed();
      case Stage::kCentroids: return Centroids();
      case Stage::kGrid: return GridStage();
      case Stage::kGenerate: return Generate();
      case Stage::kScore: return Score();
      case Stage::kAnalyze: return Analyze();
      case Stage::kAgree: return Agree();
      case Stage::kReport: return Report();
    }
    return {};
  }

 private:
  Json Expand() {
    const auto templates = LoadTemplates(config_.templates);
    Json summary = Json::object();
    for (Language lang : config_.languages) {
      const StereotypeLexicon lex = LoadLexicon(config_.lexicons.at(lang));
      if (lex.language != lang) {
        throw ConfigError("lexicons." + std::string(ToString(lang)),
                          "file holds a '" + std::string(ToString(lex.language)) + "' lexicon");
      }
      if (config_.check_lexicon_counts) ValidateDefaultLexiconCounts(lex);
      const auto sentences = ExpandTemplates(lex, templates);
      WriteSentences(layout_.Sentences(lang), sentences);
      std::size_t male = 0;
      for (const auto& s : sentences) male += s.gender == Gender::kMale;
      summary[std::string(ToString(lang))] = {{"male", male}, {"female", sentences.size() - male},
                                              {"lexicon_version", lex.version}};
    }
    return summary;
  }

  Json Embed() {
    Json summary = Json::object();
    for (Language lang : config_.languages) {
      RequireUpstream(Stage::kEmbed, layout_.Sentences(lang), "expand");
      const auto sentences = LoadSentences(layout_.Sentences(lang));
      std::vector<std::string> texts = Texts(sentences);
      for (Gender g : {Gender::kMale, Gender::kFemale}) {
        for (auto& w : NounTargets(sentences, g)) texts.push_back(std::move(w));
      }
      embedder_.EmbedBatch(texts);
      summary[std::string(ToString(lang))] = {{"texts", texts.size()}};
    }
    return summary;
  }

  Json Centroids() {
    Json weat = Json::object();
    for (Language lang : config_.languages) {
      RequireUpstream(Stage::kCentroids, layout_.Sentences(lang), "expand");
      const auto sentences = LoadSentences(layout_.Sentences(lang));
      std::vector<std::string> male, female;
      for (const auto& s : sentences) (s.gender == Gender::kMale ? male : female).push_back(s.text);
      GenderCentroids c = BuildCentroids(embedder_.EmbedBatch(male), embedder_.EmbedBatch(female));
      c.language = lang;
      c.model_id = config_.embedding.model_id;
      SaveCentroids(layout_.Centroids(lang), c);

      const auto tm = embedder_.EmbedBatch(NounTargets(sentences, Gender::kMale));
      const auto tf = embedder_.EmbedBatch(NounTargets(sentences, Gender::kFemale));
      const auto am = embedder_.EmbedBatch(Texts(SentencesWhere(sentences, Gender::kMale, false)));
      const auto af = embedder_.EmbedBatch(Texts(SentencesWhere(sentences, Gender::kFemale, false)));
      try {
        weat[std::string(ToString(lang))] = ToJson(WeatEffectSize(tm, tf, am, af));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerate) throw;
        weat[std::string(ToString(lang))] = {{"degenerate", true}, {"error", e.what()}};
      }
    }
    std::filesystem::create_directories(layout_.ReportDir());
    WriteFileAtomic(layout_.ReportDir() / "weat.json", weat.dump(2) + "\n");
    return weat;
  }

  Json GridStage() {
    const auto occ = LoadOccupations(config_.occupations);
    const auto pers = LoadPersonalities(config_.personalities);
    if (config_.strict_catalogs) ValidateShippedCounts(occ, pers);
    const auto grid = BuildGrid(occ, pers, config_.languages, config_.grid);
    WriteGrid(layout_.Grid(), grid);
    return {{"conditions", grid.size()}};
  }

  std::unique_ptr<TextProvider> MakeProvider() const {
    const auto& g = config_.generation;
    if (g.provider == "transcript") return std::make_unique<TranscriptProvider>(*g.transcripts);
    return std::make_unique<HttpChatProvider>(g.http);
  }

  Json Generate() {
    RequireUpstream(Stage::kGenerate, layout_.Grid(), "grid");
    const auto grid = LoadGrid(layout_.Grid());
    auto provider = MakeProvider();
    ArtifactStore store(layout_.Artifacts());
    Json summary = Json::object();
    for (const auto& model : config_.generation.models) {
      GenerationParams params = config_.generation.params;
      params.model_name = model;
      BatchOptions options;
      options.workers = config_.generation.workers;
      Json r = ToJson(RunBatch(grid, params, *provider, store, options));
      r.erase("wall_time_seconds");
      summary[model] = std::move(r);
    }
    return summary;
  }

  Json Score() {
    for (Language lang : config_.languages) {
      RequireUpstream(Stage::kScore, layout_.Centroids(lang), "centroids");
    }
    RequireUpstream(Stage::kScore, layout_.Artifacts(), "generate");
    RequireUpstream(Stage::kScore, layout_.Grid(), "grid");
    std::map<std::string, PersonaCondition> by_id;
    for (auto& c : LoadGrid(layout_.Grid())) by_id.emplace(c.condition_id, std::move(c));
    std::vector<Artifact> artifacts = LoadArtifacts(layout_.Artifacts());
    std::erase_if(artifacts, [](const Artifact& a) { return !a.qc.passed; });
    std::sort(artifacts.begin(), artifacts.end(),
              [](const auto& a, const auto& b) { return a.story_id < b.story_id; });
    std::map<Language, GenderCentroids> centroids;
    std::vector<AggregationStrategy> strategies = {AggregationStrategy::kMaxAbs};
    for (auto s : AlternativeStrategies()) strategies.push_back(s);
    std::vector<ScoredStory> scored;
    for (const auto& a : artifacts) {
      auto it = by_id.find(a.condition_id);
      if (it == by_id.end()) {
        throw Error(ErrorCode::kValidation,
                    "artifact '" + a.story_id + "' refers to a condition missing from the grid");
      }
      const PersonaCondition& cond = it->second;
      if (!centroids.count(cond.language)) {
        RequireUpstream(Stage::kScore, layout_.Centroids(cond.language), "centroids");
        centroids.emplace(cond.language, LoadCentroids(layout_.Centroids(cond.language)));
      }
      const auto sentences = SegmentSentences(a.text, cond.language);
      ScoredStory s = ScoreStory(a.story_id, sentences, cond.language,
                                 centroids.at(cond.language), embedder_, strategies);
      s.condition_id = cond.condition_id;
      s.condition = cond.Key();
      s.model = a.model_name;
      s.occ_type = cond.occupation.stereotype;
      scored.push_back(std::move(s));
    }
    WriteScoredStories(layout_.Scored(), scored);
    return {{"stories", scored.size()}};
  }

  Json Analyze() {
    RequireUpstream(Stage::kAnalyze, layout_.Scored(), "score");
    const auto stories = LoadScoredStories(layout_.Scored());
    const auto records = RecordsFromScored(stories, config_.analysis.occupation_fixed_effects);
    const auto report = layout_.ReportDir();
    std::filesystem::create_directories(report);

    const RegressionFit fit = FitModel(records, config_.analysis.spec);
    WriteFileAtomic(report / "coefficients.csv", CoefficientsCsv(fit));
    Json fits = Json::object();
    fits["pooled"] = ToJson(fit);
    for (const auto& factor : config_.analysis.stratify) {
      const auto strata = FitStratified(records, config_.analysis.spec, factor);
      WriteFileAtomic(report / ("coefficients_by_" + factor + ".csv"),
                      StratifiedCoefficientsCsv(factor, strata));
      for (const auto& [level, f] : strata) fits[factor + "=" + level] = ToJson(f);
    }
    WriteFileAtomic(report / "fits.json", fits.dump(2) + "\n");

    const auto& group_by = config_.analysis.summary_group_by;
    WriteFileAtomic(report / "summary.csv", SummaryCsv(Summarize(records, group_by), group_by));

    const std::vector<double> y = OutcomeVector(records);
    const Histogram h = ExportDistribution(y, config_.analysis.histogram_bins);
    WriteFileAtomic(report / "histogram.csv", HistogramCsv(h));

    Json robustness;
    robustness["aggregators"] = ToJson(CompareAggregators(stories));
    robustness["histogram_degenerate"] = h.degenerate;
    robustness["stability"] = Stability();
    WriteFileAtomic(report / "robustness.json", robustness.dump(2) + "\n");
    return {{"stories", stories.size()}, {"terms", fit.coefficients.size()},
            {"r_squared", fit.r_squared}};
  }

  // Distance between stories of one condition across models.
  Json Stability() {
    if (!std::filesystem::exists(layout_.Artifacts())) return nullptr;
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& a : LoadArtifacts(layout_.Artifacts())) {
      if (a.qc.passed) groups[a.condition_id].push_back(a.text);
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (auto& [id, texts] : groups) {
      if (texts.size() < 2) continue;
      std::sort(texts.begin(), texts.end());
      sum += StabilityCheck(texts, embedder_);
      ++n;
    }
    if (n == 0) return nullptr;
    return {{"mean_pairwise_cosine_distance", sum / static_cast<double>(n)}, {"groups", n}};
  }

  Json Agree() {
    if (!config_.annotations) {
      throw Error(ErrorCode::kDependency, "stage 'agree' needs config.annotations");
    }
    const auto set = LoadAnnotations(config_.annotations->path, config_.annotations->language);
    const Json j = ToJson(ComputeAgreement(set, config_.annotations->by_gender));
    std::filesystem::create_directories(layout_.ReportDir());
    WriteFileAtomic(layout_.ReportDir() / "agreement.json", j.dump(2) + "\n");
    return {{"items", set.items.size()}};
  }

  Json Report() {
    const auto report = layout_.ReportDir();
    std::filesystem::create_directories(report);
    Json inputs = Json::object();
    const auto add = [&](const std::filesystem::path& p) {
      if (!p.empty() && std::filesystem::is_regular_file(p)) {
        inputs[Relative(p, config_.base_dir)] = Sha256FileHex(p);
      }
    };
    for (const auto& [lang, p] : config_.lexicons) add(p);
    add(config_.templates);
    add(config_.occupations);
    add(config_.personalities);
    if (config_.generation.transcripts) add(*config_.generation.transcripts);
    if (config_.annotations) add(config_.annotations->path);

    Json outputs = Json::object();
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(report)) {
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) outputs[f.filename().string()] = Sha256FileHex(f);

    Json embedding{{"backend", ToJson(config_.embedding).at("backend")},
                   {"model_id", config_.embedding.model_id}};
    if (config_.embedding.backend == EmbeddingBackend::kDeterministicTest) {
      embedding["dim"] = config_.embedding.dim;
      embedding["seed"] = config_.embedding.seed;
    }
    Json languages = Json::array();
    for (Language l : config_.languages) languages.push_back(ToString(l));
    Json manifest{{"version", kVersion},
                  {"seed", config_.seed},
                  {"languages", languages},
                  {"models", config_.generation.models},
                  {"embedding", embedding},
                  {"generation", {{"provider", config_.generation.provider},
                                  {"temperature", config_.generation.params.temperature},
                                  {"top_p", config_.generation.params.top_p},
                                  {"provider_defaults", config_.generation.params.provider_defaults},
                                  {"max_retries", config_.generation.params.max_retries}}},
                  {"inputs", inputs},
                  {"outputs", outputs}};
    WriteFileAtomic(report / "manifest.json", manifest.dump(2) + "\n");
    return {{"outputs", files.size()}};
  }

  const PipelineConfig& config_;
  PipelineLayout layout_;
  EmbeddingProvider embedder_;
};

}  // namespace

std::string_view ToString(Stage s) {
  switch (s) {
    case Stage::kExpand: return "expand";
    case Stage::kEmbed: return "embed";
    case Stage::kCentroids: return "centroids";
    case Stage::kGrid: return "grid";
    case Stage::kGenerate: return "generate";
    case Stage::kScore: return "score";
    case Stage::kAnalyze: return "analyze";
    case Stage::kAgree: return "agree";
    case Stage::kReport: return "report";
  }
  return "";
}

const std::vector<Stage>& AllStages() { return kAllStages; }

std::vector<Stage> ParseStages(std::string_view csv) {
  std::set<Stage> chosen;
  for (const auto& raw : SplitString(csv, ',')) {
    const std::string name = Trim(raw);
    if (name.empty()) continue;
    if (name == "all") {
      chosen.insert(kAllStages.begin(), kAllStages.end());
      continue;
    }
    auto it = std::find_if(kAllStages.begin(), kAllStages.end(),
                           [&](Stage s) { return ToString(s) == name; });
    if (it == kAllStages.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown stage '" + name + "'");
    }
    chosen.insert(*it);
  }
  if (chosen.empty()) throw Error(ErrorCode::kInvalidArgument, "no stages selected");
  return {chosen.begin(), chosen.end()};
}

std::filesystem::path PipelineLayout::Sentences(Language l) const {
  return out_dir / ("sentences_" + std::string(ToString(l)) + ".jsonl");
}

std::filesystem::path PipelineLayout::Centroids(Language l) const {
  return out_dir / ("centroids_" + std::string(ToString(l)) + ".json");
}

void PipelineConfig::Validate() const {
  if (out_dir.empty()) throw ConfigError("out_dir", "is required");
  if (languages.empty()) throw ConfigError("languages", "must list at least one language");
  for (Language l : languages) {
    const std::string field = "lexicons." + std::string(ToString(l));
    auto it = lexicons.find(l);
    if (it == lexicons.end()) throw ConfigError(field, "is required");
    RequireFile(field, it->second);
  }
  RequireFile("templates", templates);
  RequireFile("occupations", occupations);
  RequireFile("personalities", personalities);
  try {
    embedding.Validate();
  } catch (const Error& e) {
    throw ConfigError("embedding", e.what());
  }
  if (generation.models.empty()) throw ConfigError("generation.models", "must be non-empty");
  std::set<std::string> slugs;
  for (const auto& m : generation.models) {
    if (Slugify(m).empty() || !slugs.insert(Slugify(m)).second) {
      throw ConfigError("generation.models", "model names must have distinct non-empty slugs");
    }
  }
  if (generation.provider == "transcript") {
    if (!generation.transcripts) throw ConfigError("generation.transcripts", "is required");
    RequireFile("generation.transcripts", *generation.transcripts);
  } else if (generation.provider == "http") {
    if (generation.http.endpoint.empty()) throw ConfigError("generation.http.endpoint", "is required");
  } else {
    throw ConfigError("generation.provider", "must be 'transcript' or 'http'");
  }
  if (generation.workers == 0) throw ConfigError("generation.workers", "must be >= 1");
  try {
    GenerationParams p = generation.params;
    p.model_name = generation.models.front();
    p.Validate();
  } catch (const Error& e) {
    throw ConfigError("generation", e.what());
  }
  if (analysis.histogram_bins < 2) throw ConfigError("analysis.histogram_bins", "must be >= 2");
  if (annotations) RequireFile("annotations.path", annotations->path);
}

PipelineConfig PipelineConfigFromJson(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("", "top level must be an object");
  PipelineConfig c;
  c.base_dir = base_dir;
  const auto path_of = [&](const Json& obj, const char* key, const std::string& prefix) {
    const std::string s = Field<std::string>(obj, key, prefix, "");
    return s.empty() ? std::filesystem::path() : Resolve(base_dir, s);
  };
  c.out_dir = path_of(j, "out_dir", "");
  c.seed = Field<std::uint64_t>(j, "seed", "", 0);
  if (j.contains("languages")) {
    c.languages.clear();
    for (const auto& l : Field<std::vector<std::string>>(j, "languages", "", {})) {
      try {
        c.languages.push_back(ParseLanguage(l));
      } catch (const Error& e) {
        throw ConfigError("languages", e.what());
      }
    }
  }
  if (j.contains("lexicons")) {
    for (const auto& [lang, p] : j.at("lexicons").items()) {
      try {
        c.lexicons[ParseLanguage(lang)] = Resolve(base_dir, p.get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError("lexicons." + lang, e.what());
      }
    }
  }
  c.templates = path_of(j, "templates", "");
  c.occupations = path_of(j, "occupations", "");
  c.personalities = path_of(j, "personalities", "");
  c.strict_catalogs = Field<bool>(j, "strict_catalogs", "", false);
  c.check_lexicon_counts = Field<bool>(j, "check_lexicon_counts", "", false);
  if (j.contains("grid")) {
    c.grid.neutral_personality =
        Field<bool>(j.at("grid"), "neutral_personality", "grid.", false);
  }

  const Json emb = j.value("embedding", Json::object());
  try {
    c.embedding = EmbeddingConfigFromJson(emb);
  } catch (const Error& e) {
    throw ConfigError("embedding", e.what());
  } catch (const Json::exception& e) {
    throw ConfigError("embedding", e.what());
  }
  if (!emb.contains("seed")) c.embedding.seed = c.seed;
  if (c.embedding.cache_path) c.embedding.cache_path = Resolve(base_dir, c.embedding.cache_path->string());

  const Json gen = j.value("generation", Json::object());
  c.generation.provider = Field<std::string>(gen, "provider", "generation.", "transcript");
  if (gen.contains("transcripts")) c.generation.transcripts = path_of(gen, "transcripts", "generation.");
  c.generation.models = Field<std::vector<std::string>>(gen, "models", "generation.", {});
  c.generation.workers = Field<std::size_t>(gen, "workers", "generation.", 1);
  auto& p = c.generation.params;
  p.temperature = Field<double>(gen, "temperature", "generation.", p.temperature);
  p.top_p = Field<double>(gen, "top_p", "generation.", p.top_p);
  p.max_retries = Field<int>(gen, "max_retries", "generation.", p.max_retries);
  p.provider_defaults = Field<bool>(gen, "provider_defaults", "generation.", false);
  if (gen.contains("http")) {
    const Json& h = gen.at("http");
    auto& hc = c.generation.http;
    hc.provider_id = Field<std::string>(h, "provider_id", "generation.http.", hc.provider_id);
    hc.endpoint = Field<std::string>(h, "endpoint", "generation.http.", "");
    hc.requests_per_second =
        Field<double>(h, "requests_per_second", "generation.http.", hc.requests_per_second);
    hc.max_transport_retries =
        Field<int>(h, "max_transport_retries", "generation.http.", hc.max_transport_retries);
    hc.retry_backoff_seconds =
        Field<double>(h, "retry_backoff_seconds", "generation.http.", hc.retry_backoff_seconds);
    hc.timeout_seconds = Field<double>(h, "timeout_seconds", "generation.http.", hc.timeout_seconds);
  }
  p.provider_id = c.generation.provider == "http" ? c.generation.http.provider_id : "transcript";

  const Json an = j.value("analysis", Json::object());
  if (an.contains("spec")) {
    try {
      c.analysis.spec = RegressionSpecFromJson(an.at("spec"));
    } catch (const Error& e) {
      throw ConfigError("analysis.spec", e.what());
    }
  }
  c.analysis.stratify = Field(an, "stratify", "analysis.", c.analysis.stratify);
  c.analysis.summary_group_by = Field(an, "summary_group_by", "analysis.", c.analysis.summary_group_by);
  c.analysis.histogram_bins = Field(an, "histogram_bins", "analysis.", c.analysis.histogram_bins);
  c.analysis.occupation_fixed_effects =
      Field(an, "occupation_fixed_effects", "analysis.", c.analysis.occupation_fixed_effects);
  if (c.analysis.occupation_fixed_effects &&
      std::find(c.analysis.spec.predictors.begin(), c.analysis.spec.predictors.end(),
                "occupation") == c.analysis.spec.predictors.end()) {
    c.analysis.spec.predictors.push_back("occupation");
  }

  if (j.contains("annotations")) {
    const Json& a = j.at("annotations");
    AnnotationConfig ac;
    ac.path = path_of(a, "path", "annotations.");
    try {
      ac.language = ParseLanguage(Field<std::string>(a, "language", "annotations.", "en"));
    } catch (const Error& e) {
      throw ConfigError("annotations.language", e.what());
    }
    ac.by_gender = Field<bool>(a, "by_gender", "annotations.", true);
    c.annotations = ac;
  }
  return c;
}

PipelineConfig LoadPipelineConfig(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(ReadFile(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  return PipelineConfigFromJson(j, base);
}

PipelineResult RunPipeline(const PipelineConfig& config, const std::vector<Stage>& stages) {
  config.Validate();
  std::filesystem::create_directories(config.out_dir);
  Runner runner(config);
  PipelineResult result;
  for (Stage s : kAllStages) {
    if (std::find(stages.begin(), stages.end(), s) == stages.end()) continue;
    spdlog::info("stage {}", ToString(s));
    result.stage_summaries[std::string(ToString(s))] = runner.Run(s);
    result.stages_run.push_back(s);
  }
  return result;
}

}  // namespace biasaudit
