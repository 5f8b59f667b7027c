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

#include "biasaudit/generation.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "biasaudit/http.h"
#include "biasaudit/scoring.h"

namespace biasaudit {
namespace {

bool IsDevanagari(char32_t c) {
  return (c >= 0x0900 && c <= 0x097F) || (c >= 0xA8E0 && c <= 0xA8FF);
}

bool IsLatin(char32_t c) {
  return c < 0x0250 || (c >= 0x1E00 && c <= 0x1EFF) || (c >= 0x2000 && c <= 0x206F);
}

bool RetryableStatus(int status) { return status == 429 || status >= 500; }

}  // namespace

void GenerationParams::Validate() const {
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "top_p must lie in (0, 1]");
  }
  if (max_retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  }
  if (Trim(model_name).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "model_name is required");
  }
}

std::string_view ToString(QcReason r) {
  switch (r) {
    case QcReason::kTooFewSentences: return "too_few_sentences";
    case QcReason::kTooManySentences: return "too_many_sentences";
    case QcReason::kWrongScript: return "wrong_script";
    case QcReason::kEmpty: return "empty";
    case QcReason::kTruncationSuspected: return "truncation_suspected";
  }
  return "";
}

QcReason ParseQcReason(std::string_view s) {
  for (auto r : {QcReason::kTooFewSentences, QcReason::kTooManySentences,
                 QcReason::kWrongScript, QcReason::kEmpty,
                 QcReason::kTruncationSuspected}) {
    if (ToString(r) == s) return r;
  }
  throw Error(ErrorCode::kParse, "unknown QC reason '" + std::string(s) + "'");
}

double ScriptShare(std::string_view text, Language language) {
  std::size_t total = 0;
  std::size_t in_script = 0;
  for (char32_t c : DecodeUtf8(text)) {
    if (IsUnicodeSpace(c)) continue;
    ++total;
    if (language == Language::kHi ? IsDevanagari(c) : IsLatin(c)) ++in_script;
  }
  return total == 0 ? 0.0 : static_cast<double>(in_script) / static_cast<double>(total);
}

QcVerdict QcCheck(std::string_view text, Language language) {
  QcVerdict v;
  const std::string trimmed = Trim(text);
  if (trimmed.empty()) {
    v.passed = false;
    v.reasons.push_back(QcReason::kEmpty);
    return v;
  }
  const std::vector<std::string> segments = SegmentSentences(trimmed, language);
  if (segments.empty()) {
    v.passed = false;
    v.reasons.push_back(QcReason::kEmpty);
    return v;
  }
  if (segments.size() < kQcMinSentences) v.reasons.push_back(QcReason::kTooFewSentences);
  if (segments.size() > kQcMaxSentences) v.reasons.push_back(QcReason::kTooManySentences);
  if (ScriptShare(trimmed, language) < kQcMinScriptShare) {
    v.reasons.push_back(QcReason::kWrongScript);
  }
  const std::string& last = segments.back();
  if (!EndsWithTerminator(last, language) &&
      DecodeUtf8(last).size() < kQcShortTailCodePoints) {
    v.reasons.push_back(QcReason::kTruncationSuspected);
  }
  v.passed = v.reasons.empty();
  return v;
}

Json ToJson(const Artifact& a) {
  Json reasons = Json::array();
  for (auto r : a.qc.reasons) reasons.push_back(ToString(r));
  return Json{{"story_id", a.story_id},
              {"condition_id", a.condition_id},
              {"model_name", a.model_name},
              {"text", a.text},
              {"created_at", a.created_at},
              {"attempt", a.attempt},
              {"qc", {{"passed", a.qc.passed}, {"reasons", std::move(reasons)}}}};
}

Artifact ArtifactFromJson(const Json& j) {
  Artifact a;
  a.story_id = j.at("story_id").get<std::string>();
  a.condition_id = j.at("condition_id").get<std::string>();
  a.model_name = j.at("model_name").get<std::string>();
  a.text = j.at("text").get<std::string>();
  a.created_at = j.value("created_at", std::string());
  a.attempt = j.value("attempt", 1);
  const Json& qc = j.at("qc");
  a.qc.passed = qc.at("passed").get<bool>();
  for (const auto& r : qc.at("reasons")) a.qc.reasons.push_back(ParseQcReason(r.get<std::string>()));
  if (a.qc.passed != a.qc.reasons.empty()) {
    throw Error(ErrorCode::kValidation,
                "artifact '" + a.story_id + "': qc.passed disagrees with reasons");
  }
  return a;
}

std::string MakeStoryId(std::string_view model_name, std::string_view condition_id,
                        std::size_t k) {
  return Slugify(model_name) + ":" + std::string(condition_id) + ":" + std::to_string(k);
}

TranscriptProvider::TranscriptProvider(const std::filesystem::path& path)
    : TranscriptProvider([&] {
        try {
          return Json::parse(ReadFile(path));
        } catch (const Json::exception& e) {
          throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
        }
      }()) {}

TranscriptProvider::TranscriptProvider(const Json& spec) {
  try {
    per_story_ = spec.value("sentences_per_story", per_story_);
    if (spec.contains("pools")) {
      for (const auto& [lang, pool] : spec.at("pools").items()) {
        pools_[ParseLanguage(lang)] = pool.get<std::vector<std::string>>();
      }
    }
    if (spec.contains("responses")) {
      responses_ = spec.at("responses").get<std::map<std::string, std::string>>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("transcript spec: ") + e.what());
  }
  if (per_story_ == 0) {
    throw Error(ErrorCode::kValidation, "sentences_per_story must be positive");
  }
}

std::string TranscriptProvider::Complete(const std::string& prompt,
                                         const GenerationParams& params) {
  const std::string key = Sha256Hex(prompt);
  if (auto it = responses_.find(key); it != responses_.end()) return it->second;
  std::optional<Language> lang;
  for (Language l : {Language::kEn, Language::kHi}) {
    const std::string marker =
        " in " + std::string(LanguageDisplayName(l)) + " as a moderate-length";
    if (prompt.find(marker) != std::string::npos) lang = l;
  }
  if (!lang || pools_.find(*lang) == pools_.end() || pools_.at(*lang).empty()) {
    throw Error(ErrorCode::kNotFound, "no recorded response or sentence pool for prompt " + key);
  }
  const auto& pool = pools_.at(*lang);
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ranked.emplace_back(Sha256Hex(params.model_name + ":" + key + ":" + std::to_string(i)), i);
  }
  std::sort(ranked.begin(), ranked.end());
  std::string text;
  for (std::size_t i = 0; i < std::min(per_story_, ranked.size()); ++i) {
    if (!text.empty()) text += ' ';
    text += pool[ranked[i].second];
  }
  return text;
}

TokenBucket::TokenBucket(double rate_per_second)
    : interval_(rate_per_second > 0.0 ? 1.0 / rate_per_second : 0.0),
      next_(std::chrono::steady_clock::now()) {}

void TokenBucket::Acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
  }
  std::this_thread::sleep_until(slot);
}

std::string ApiKeyEnvVar(std::string_view provider_id) {
  std::string out = "BIASAUDIT_";
  for (char c : provider_id) {
    const auto uc = static_cast<unsigned char>(c);
    out += std::isalnum(uc) ? static_cast<char>(std::toupper(uc)) : '_';
  }
  return out + "_API_KEY";
}

HttpChatProvider::HttpChatProvider(HttpChatConfig config)
    : config_(std::move(config)), bucket_(config_.requests_per_second) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "chat provider needs an endpoint");
  }
  const std::string var = ApiKeyEnvVar(config_.provider_id);
  const char* key = std::getenv(var.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::kAuthentication, "environment variable " + var + " is not set");
  }
  api_key_ = key;
}

std::string HttpChatProvider::Complete(const std::string& prompt,
                                       const GenerationParams& params) {
  Json body{{"model", params.model_name},
            {"messages", Json::array({{{"role", "user"}, {"content", prompt}}})}};
  if (!params.provider_defaults) {
    body["temperature"] = params.temperature;
    body["top_p"] = params.top_p;
  }
  const std::string payload = body.dump();
  const HttpHeaders headers = {{"Authorization", "Bearer " + api_key_}};
  double delay = config_.retry_backoff_seconds;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_transport_retries; ++attempt) {
    if (attempt > 0) {
      spdlog::warn("chat request retry {} after: {}", attempt, last_error);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      delay *= 2.0;
    }
    bucket_.Acquire();
    HttpResponse resp;
    try {
      resp = HttpPostJson(config_.endpoint, "/chat/completions", payload, headers,
                          config_.timeout_seconds);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTransport) throw;
      last_error = e.what();
      continue;
    }
    if (resp.status == 401 || resp.status == 403) {
      throw Error(ErrorCode::kAuthentication,
                  "provider '" + config_.provider_id + "' rejected the credential (HTTP " +
                      std::to_string(resp.status) + ")");
    }
    if (RetryableStatus(resp.status)) {
      last_error = "HTTP " + std::to_string(resp.status);
      continue;
    }
    if (resp.status != 200) {
      throw Error(ErrorCode::kTransport, "chat completion failed with HTTP " +
                                             std::to_string(resp.status) + ": " + resp.body);
    }
    try {
      const Json j = Json::parse(resp.body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse, std::string("malformed chat response: ") + e.what());
    }
  }
  throw Error(ErrorCode::kTransport, "chat completion failed after " +
                                         std::to_string(config_.max_transport_retries + 1) +
                                         " attempts: " + last_error);
}

Artifact GenerateOne(const PersonaCondition& condition,
                     const GenerationParams& params, TextProvider& provider,
                     std::size_t k) {
  params.Validate();
  const std::string prompt = RenderPrompt(condition);
  Artifact a;
  a.story_id = MakeStoryId(params.model_name, condition.condition_id, k);
  a.condition_id = condition.condition_id;
  a.model_name = params.model_name;
  for (int attempt = 1; attempt <= params.max_retries + 1; ++attempt) {
    a.text = provider.Complete(prompt, params);
    a.attempt = attempt;
    a.created_at = NowIso8601();
    a.qc = QcCheck(a.text, condition.language);
    if (a.qc.passed) break;
  }
  return a;
}

ArtifactStore::ArtifactStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    for (auto& a : LoadArtifacts(path_)) {
      if (a.qc.passed) passed_.emplace(a.condition_id, a.model_name);
      artifacts_.push_back(std::move(a));
    }
  }
}

void ArtifactStore::Append(const Artifact& a) {
  std::lock_guard lock(mu_);
  if (a.qc.passed && passed_.count({a.condition_id, a.model_name}) > 0) {
    throw Error(ErrorCode::kValidation, "store already holds a passed artifact for " +
                                            a.condition_id + " / " + a.model_name);
  }
  const std::string line = ToJson(a).dump() + "\n";
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "cannot append to artifact store " + path_.string());
  if (a.qc.passed) passed_.emplace(a.condition_id, a.model_name);
  artifacts_.push_back(a);
}

bool ArtifactStore::HasPassed(const std::string& condition_id,
                              const std::string& model) const {
  std::lock_guard lock(mu_);
  return passed_.count({condition_id, model}) > 0;
}

std::vector<Artifact> ArtifactStore::Artifacts() const {
  std::lock_guard lock(mu_);
  return artifacts_;
}

std::size_t ArtifactStore::CountPassed() const {
  std::lock_guard lock(mu_);
  return passed_.size();
}

std::size_t ArtifactStore::CountFailed() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(
      artifacts_.begin(), artifacts_.end(), [](const auto& a) { return !a.qc.passed; }));
}

std::vector<Artifact> LoadArtifacts(const std::filesystem::path& path) {
  std::vector<Artifact> out;
  for (const auto& line : ReadJsonLines(path)) {
    try {
      out.push_back(ArtifactFromJson(line.value));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line.line_number) + ": " +
                                e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ":" +
                                         std::to_string(line.line_number) + ": " + e.what());
    }
  }
  return out;
}

BatchReport RunBatch(std::span<const PersonaCondition> grid,
                     const GenerationParams& params, TextProvider& provider,
                     ArtifactStore& store, const BatchOptions& options) {
  if (grid.empty()) throw Error(ErrorCode::kEmptyInput, "empty grid");
  params.Validate();
  const auto start = std::chrono::steady_clock::now();
  BatchReport report;
  std::vector<const PersonaCondition*> todo;
  for (const auto& c : grid) {
    if (store.HasPassed(c.condition_id, params.model_name)) {
      ++report.n_skipped;
    } else {
      todo.push_back(&c);
    }
  }
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> ok{0}, failed{0}, transport{0};
  std::atomic<bool> cancelled{false};
  std::mutex error_mu;
  std::exception_ptr fatal;
  const auto work = [&] {
    while (true) {
      {
        std::lock_guard lock(error_mu);
        if (fatal) return;
      }
      if (options.cancel != nullptr && options.cancel->load()) {
        cancelled = true;
        return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      try {
        const Artifact a = GenerateOne(*todo[i], params, provider);
        store.Append(a);
        (a.qc.passed ? ok : failed).fetch_add(1);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kTransport) {
          spdlog::warn("condition {} failed: {}", todo[i]->condition_id, e.what());
          failed.fetch_add(1);
          transport.fetch_add(1);
          continue;
        }
        std::lock_guard lock(error_mu);
        if (!fatal) fatal = std::current_exception();
        return;
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!fatal) fatal = std::current_exception();
        return;
      }
    }
  };
  const std::size_t width = std::max<std::size_t>(1, std::min(options.workers, todo.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < width; ++w) pool.emplace_back(work);
    work();
  }
  if (fatal) std::rethrow_exception(fatal);
  report.n_ok = ok;
  report.n_failed = failed;
  report.n_transport = transport;
  report.cancelled = cancelled;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Json ToJson(const BatchReport& r) {
  return Json{{"n_ok", r.n_ok},
              {"n_failed", r.n_failed},
              {"n_skipped", r.n_skipped},
              {"n_transport_errors", r.n_transport},
              {"cancelled", r.cancelled},
              {"wall_time_seconds", r.wall_time_seconds}};
}

}  // namespace biasaudit
