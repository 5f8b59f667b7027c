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

#ifndef BIASAUDIT_GENERATION_H_
#define BIASAUDIT_GENERATION_H_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/corpus.h"
#include "biasaudit/types.h"
#include "biasaudit/util.h"

namespace biasaudit {

struct GenerationParams {
  double temperature = 0.7;
  double top_p = 0.9;
  int max_retries = 3;  // re-generations after the first attempt
  std::string provider_id = "transcript";
  std::string model_name;
  // Omit temperature and top_p from requests.
  bool provider_defaults = false;

  // Throws kInvalidArgument.
  void Validate() const;
};

inline constexpr std::size_t kQcMinSentences = 4;
inline constexpr std::size_t kQcMaxSentences = 14;
inline constexpr double kQcMinScriptShare = 0.5;
inline constexpr std::size_t kQcShortTailCodePoints = 15;

enum class QcReason {
  kTooFewSentences,
  kTooManySentences,
  kWrongScript,
  kEmpty,
  kTruncationSuspected,
};
std::string_view ToString(QcReason r);
QcReason ParseQcReason(std::string_view s);

struct QcVerdict {
  bool passed = true;
  std::vector<QcReason> reasons;
};

// Pure and total: never throws.
QcVerdict QcCheck(std::string_view text, Language language);

// Share of non-space code points in the language's script.
double ScriptShare(std::string_view text, Language language);

struct Artifact {
  std::string story_id;
  std::string condition_id;
  std::string model_name;
  std::string text;
  std::string created_at;
  int attempt = 0;
  QcVerdict qc;
};

Json ToJson(const Artifact& a);
Artifact ArtifactFromJson(const Json& j);

// "{model-slug}:{condition_id}:{k}".
std::string MakeStoryId(std::string_view model_name, std::string_view condition_id,
                        std::size_t k = 0);

class TextProvider {
 public:
  virtual ~TextProvider() = default;
  virtual std::string Complete(const std::string& prompt,
                               const GenerationParams& params) = 0;
};

// Adapts a callable; used for scripted providers.
class FunctionProvider : public TextProvider {
 public:
  using Fn = std::function<std::string(const std::string&, const GenerationParams&)>;
  explicit FunctionProvider(Fn fn) : fn_(std::move(fn)) {}
  std::string Complete(const std::string& prompt,
                       const GenerationParams& params) override {
    return fn_(prompt, params);
  }

 private:
  Fn fn_;
};

// Offline provider. Replays recorded responses keyed by the SHA-256 of the
// prompt; other prompts get a paragraph drawn from a per-language sentence
// pool, chosen by hashing the model name and prompt. File format:
//   {"sentences_per_story": 7, "pools": {"en": [...], "hi": [...]},
//    "responses": {"<sha256 hex>": "text"}}
class TranscriptProvider : public TextProvider {
 public:
  explicit TranscriptProvider(const std::filesystem::path& path);
  explicit TranscriptProvider(const Json& spec);
  std::string Complete(const std::string& prompt,
                       const GenerationParams& params) override;

 private:
  std::size_t per_story_ = 7;
  std::map<Language, std::vector<std::string>> pools_;
  std::map<std::string, std::string> responses_;
};

// Spaces requests at 1 / rate seconds.
class TokenBucket {
 public:
  explicit TokenBucket(double rate_per_second);
  void Acquire();

 private:
  std::mutex mu_;
  std::chrono::duration<double> interval_;
  std::chrono::steady_clock::time_point next_;
};

// "BIASAUDIT_<PROVIDER>_API_KEY" with the id upper-cased and every
// non-alphanumeric byte replaced by '_'.
std::string ApiKeyEnvVar(std::string_view provider_id);

struct HttpChatConfig {
  std::string provider_id = "openai";
  std::string endpoint;  // base URL; requests go to {endpoint}/chat/completions
  double requests_per_second = 2.0;
  int max_transport_retries = 3;
  double retry_backoff_seconds = 0.5;
  double timeout_seconds = 120.0;
};

// Chat-completions style HTTP adapter. The credential is read from the
// environment at construction (kAuthentication when unset).
class HttpChatProvider : public TextProvider {
 public:
  explicit HttpChatProvider(HttpChatConfig config);
  std::string Complete(const std::string& prompt,
                       const GenerationParams& params) override;

 private:
  HttpChatConfig config_;
  std::string api_key_;
  TokenBucket bucket_;
};

// First attempt passing QC, else the last attempt with qc.passed false.
// Provider exceptions propagate.
Artifact GenerateOne(const PersonaCondition& condition,
                     const GenerationParams& params, TextProvider& provider,
                     std::size_t k = 0);

// Append-only line-JSON store; each append is one flushed line.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path path);

  void Append(const Artifact& a);
  bool HasPassed(const std::string& condition_id, const std::string& model) const;
  std::vector<Artifact> Artifacts() const;
  std::size_t CountPassed() const;
  std::size_t CountFailed() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<Artifact> artifacts_;
  std::set<std::pair<std::string, std::string>> passed_;
};

std::vector<Artifact> LoadArtifacts(const std::filesystem::path& path);

struct BatchOptions {
  std::size_t workers = 1;
  // Checked before each condition starts; in-flight conditions finish.
  const std::atomic<bool>* cancel = nullptr;
};

struct BatchReport {
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  std::size_t n_skipped = 0;    // already passed in the store
  std::size_t n_transport = 0;  // failed without an artifact
  bool cancelled = false;
  double wall_time_seconds = 0.0;
};

// Generates every condition lacking a passed artifact for params.model_name.
// Transport errors count as failures and store nothing; authentication and
// store I/O errors abort.
BatchReport RunBatch(std::span<const PersonaCondition> grid,
                     const GenerationParams& params, TextProvider& provider,
                     ArtifactStore& store, const BatchOptions& options = {});
Json ToJson(const BatchReport& r);

}  // namespace biasaudit

#endif  // BIASAUDIT_GENERATION_H_
