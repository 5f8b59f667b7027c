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

#include "biasaudit/embedding.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_map>

#include "biasaudit/http.h"
#include "biasaudit/types.h"

namespace biasaudit {

EmbeddingVector::EmbeddingVector(std::vector<double> values, bool normalized)
    : values_(std::move(values)), normalized_(normalized) {
  if (values_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding has zero dimensions");
  }
  for (double x : values_) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "embedding contains a non-finite value");
    }
  }
  if (normalized_ && std::abs(Norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding flagged normalized has norm " +
                    FormatDouble(Norm()));
  }
}

double EmbeddingVector::Norm() const {
  double s = 0.0;
  for (double x : values_) s += x * x;
  return std::sqrt(s);
}

double Dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

EmbeddingVector Normalize(const EmbeddingVector& v) {
  const double norm = v.Norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  }
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x /= norm;
  return EmbeddingVector(std::move(out), true);
}

double Cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double dot = Dot(a, b);
  const double na = a.Norm();
  const double nb = b.Norm();
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

EmbeddingVector DeterministicEmbed(std::string_view text, std::size_t dim,
                                   std::uint64_t seed) {
  if (dim < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "deterministic embedding needs dim >= 2");
  }
  std::vector<double> values(dim);
  std::string buf(16, '\0');
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((seed >> (8 * k)) & 0xFF);
  buf.append(text);
  for (std::size_t block = 0; block * 4 < dim; ++block) {
    for (int k = 0; k < 8; ++k) {
      buf[8 + k] = static_cast<char>((block >> (8 * k)) & 0xFF);
    }
    const auto digest = Sha256(buf);
    for (std::size_t lane = 0; lane < 4 && block * 4 + lane < dim; ++lane) {
      std::uint64_t word = 0;
      for (int k = 0; k < 8; ++k) {
        word |= static_cast<std::uint64_t>(digest[lane * 8 + k]) << (8 * k);
      }
      // 53 random mantissa bits -> exact double in [0, 1), then [-1, 1).
      const double u = static_cast<double>(word >> 11) * 0x1.0p-53;
      values[block * 4 + lane] = 2.0 * u - 1.0;
    }
  }
  EmbeddingVector raw(std::move(values));
  if (!(raw.Norm() > 0.0)) {
    std::vector<double> axis(dim, 0.0);
    axis[0] = 1.0;
    return EmbeddingVector(std::move(axis), true);
  }
  return Normalize(raw);
}

std::string EmbeddingCacheKey(std::string_view text) { return Sha256Hex(text); }

void EmbeddingProviderConfig::Validate() const {
  if (batch_size == 0) {
    throw Error(ErrorCode::kValidation, "embedding.batch_size must be positive");
  }
  if (model_id.empty()) {
    throw Error(ErrorCode::kValidation, "embedding.model_id is empty");
  }
  switch (backend) {
    case EmbeddingBackend::kRemoteHttp:
      if (!endpoint || endpoint->empty()) {
        throw Error(ErrorCode::kValidation,
                    "embedding.endpoint is required for remote_http");
      }
      break;
    case EmbeddingBackend::kCacheOnly:
      if (!cache_path) {
        throw Error(ErrorCode::kValidation,
                    "embedding.cache_path is required for cache_only");
      }
      break;
    case EmbeddingBackend::kDeterministicTest:
      if (dim < 2) {
        throw Error(ErrorCode::kValidation, "embedding.dim must be >= 2");
      }
      break;
  }
}

EmbeddingProviderConfig EmbeddingConfigFromJson(const Json& j) {
  EmbeddingProviderConfig c;
  const std::string backend = j.value("backend", std::string("deterministic_test"));
  if (backend == "cache_only") {
    c.backend = EmbeddingBackend::kCacheOnly;
  } else if (backend == "remote_http") {
    c.backend = EmbeddingBackend::kRemoteHttp;
  } else if (backend == "deterministic_test") {
    c.backend = EmbeddingBackend::kDeterministicTest;
  } else {
    throw Error(ErrorCode::kValidation,
                "embedding.backend: unknown value '" + backend + "'");
  }
  c.model_id = j.value("model_id", c.model_id);
  if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("cache_path")) {
    c.cache_path = j.at("cache_path").get<std::string>();
  }
  c.batch_size = j.value("batch_size", c.batch_size);
  c.dim = j.value("dim", c.dim);
  c.seed = j.value("seed", c.seed);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.retry_backoff_seconds =
      j.value("retry_backoff_seconds", c.retry_backoff_seconds);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  return c;
}

Json ToJson(const EmbeddingProviderConfig& c) {
  Json j;
  switch (c.backend) {
    case EmbeddingBackend::kCacheOnly: j["backend"] = "cache_only"; break;
    case EmbeddingBackend::kRemoteHttp: j["backend"] = "remote_http"; break;
    case EmbeddingBackend::kDeterministicTest:
      j["backend"] = "deterministic_test";
      break;
  }
  j["model_id"] = c.model_id;
  if (c.endpoint) j["endpoint"] = *c.endpoint;
  if (c.cache_path) j["cache_path"] = c.cache_path->string();
  j["batch_size"] = c.batch_size;
  j["dim"] = c.dim;
  j["seed"] = c.seed;
  return j;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path path)
    : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  for (const JsonLine& line : ReadJsonLines(path_)) {
    const Json& j = line.value;
    const std::string where =
        path_.string() + ":" + std::to_string(line.line_number);
    try {
      const auto dim = j.at("dim").get<std::size_t>();
      auto values = j.at("v").get<std::vector<double>>();
      if (values.size() != dim) {
        throw Error(ErrorCode::kParse, "record dim " + std::to_string(dim) +
                                           " but " +
                                           std::to_string(values.size()) +
                                           " values");
      }
      entries_.insert_or_assign(
          std::pair{j.at("model").get<std::string>(),
                    j.at("key").get<std::string>()},
          EmbeddingVector(std::move(values)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
  }
}

std::optional<EmbeddingVector> EmbeddingCache::Get(std::string_view model,
                                                   std::string_view key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(std::pair{std::string(model), std::string(key)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::Put(std::string_view model, std::string_view key,
                         const EmbeddingVector& v) {
  Json record = {{"key", key},
                 {"model", model},
                 {"dim", v.dim()},
                 {"v", std::vector<double>(v.values().begin(), v.values().end())}};
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.insert_or_assign(
      std::pair{std::string(model), std::string(key)}, v);
  (void)it;
  if (!inserted) return;
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  const std::string line = record.dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot append to cache '" + path_.string() + "'");
  }
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<EmbeddingVector> DeterministicBackend::Embed(
    std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(DeterministicEmbed(t, dim_, seed_));
  return out;
}

RemoteHttpBackend::RemoteHttpBackend(std::string endpoint, std::string model,
                                     int max_retries, double backoff_seconds,
                                     double timeout_seconds)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      max_retries_(max_retries),
      backoff_seconds_(backoff_seconds),
      timeout_seconds_(timeout_seconds) {}

std::vector<EmbeddingVector> RemoteHttpBackend::Embed(
    std::span<const std::string> texts) {
  const std::string body =
      Json{{"model", model_},
           {"texts", std::vector<std::string>(texts.begin(), texts.end())}}
          .dump();
  std::string last_error;
  double delay = backoff_seconds_;
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
      delay *= 2.0;
    }
    HttpResponse res;
    try {
      res = HttpPostJson(endpoint_, "/embed", body, {}, timeout_seconds_);
    } catch (const Error& e) {
      last_error = e.what();
      continue;
    }
    if (res.status >= 500 || res.status == 429) {
      last_error = "HTTP " + std::to_string(res.status) + ": " + res.body;
      continue;
    }
    if (res.status != 200) {
      throw Error(ErrorCode::kTransport, "embed service returned HTTP " +
                                             std::to_string(res.status) + ": " +
                                             res.body);
    }
    Json j;
    try {
      j = Json::parse(res.body);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse,
                  std::string("malformed embed response: ") + e.what());
    }
    const auto dim = j.at("dim").get<std::size_t>();
    const auto& vectors = j.at("vectors");
    if (vectors.size() != texts.size()) {
      throw Error(ErrorCode::kTransport,
                  "embed service returned " + std::to_string(vectors.size()) +
                      " vectors for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
      auto values = v.get<std::vector<double>>();
      if (values.size() != dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "embed service vector has " + std::to_string(values.size()) +
                        " components, reported dim " + std::to_string(dim));
      }
      out.emplace_back(std::move(values));
    }
    return out;
  }
  throw Error(ErrorCode::kTransport,
              "embed service unreachable after " +
                  std::to_string(max_retries_ + 1) + " attempts: " + last_error);
}

EmbedServiceHealth QueryEmbedServiceHealth(std::string_view endpoint,
                                           double timeout_seconds) {
  const HttpResponse res = HttpGet(endpoint, "/health", {}, timeout_seconds);
  EmbedServiceHealth health;
  if (res.status != 200) {
    health.status = "unavailable (HTTP " + std::to_string(res.status) + ")";
    return health;
  }
  const Json j = Json::parse(res.body);
  health.status = j.value("status", std::string());
  health.model = j.value("model", std::string());
  health.dim = j.value("dim", std::size_t{0});
  return health;
}

EmbeddingProvider::EmbeddingProvider(EmbeddingProviderConfig config)
    : config_(std::move(config)) {
  config_.Validate();
  switch (config_.backend) {
    case EmbeddingBackend::kDeterministicTest:
      backend_ = std::make_unique<DeterministicBackend>(config_.dim, config_.seed);
      break;
    case EmbeddingBackend::kRemoteHttp:
      backend_ = std::make_unique<RemoteHttpBackend>(
          *config_.endpoint, config_.model_id, config_.max_retries,
          config_.retry_backoff_seconds, config_.timeout_seconds);
      break;
    case EmbeddingBackend::kCacheOnly:
      break;
  }
  if (config_.cache_path) {
    cache_ = std::make_unique<EmbeddingCache>(*config_.cache_path);
  }
}

EmbeddingProvider::EmbeddingProvider(
    EmbeddingProviderConfig config,
    std::unique_ptr<EmbeddingBackendClient> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
  if (config_.batch_size == 0) config_.batch_size = 1;
  if (config_.cache_path) {
    cache_ = std::make_unique<EmbeddingCache>(*config_.cache_path);
  }
}

void EmbeddingProvider::CheckDim(const EmbeddingVector& v) {
  std::lock_guard lock(stats_mu_);
  if (dim_ == 0) {
    dim_ = v.dim();
  } else if (v.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "provider '" + config_.model_id + "' returned dim " +
                    std::to_string(v.dim()) + ", expected " +
                    std::to_string(dim_));
  }
}

std::vector<EmbeddingVector> EmbeddingProvider::EmbedBatch(
    std::span<const std::string> texts) {
  if (texts.empty()) {
    throw Error(ErrorCode::kEmptyInput, "embed_batch called with no texts");
  }
  std::vector<std::optional<EmbeddingVector>> out(texts.size());
  std::vector<std::string> keys(texts.size());
  // Unique missing texts, in first-seen order.
  std::vector<std::size_t> miss_first;
  std::unordered_map<std::string, std::size_t> miss_slot;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = EmbeddingCacheKey(texts[i]);
    if (cache_) {
      if (auto hit = cache_->Get(config_.model_id, keys[i])) {
        out[i] = std::move(*hit);
        continue;
      }
    }
    if (miss_slot.emplace(keys[i], miss_first.size()).second) {
      miss_first.push_back(i);
    }
  }
  if (!miss_first.empty() && !backend_) {
    const std::size_t i = miss_first.front();
    throw Error(ErrorCode::kCacheMiss,
                "cache miss for key " + keys[i] + " (model '" +
                    config_.model_id + "', text \"" + texts[i].substr(0, 60) +
                    "\")");
  }
  std::vector<EmbeddingVector> fetched(miss_first.size());
  for (std::size_t start = 0; start < miss_first.size();
       start += config_.batch_size) {
    const std::size_t end =
        std::min(miss_first.size(), start + config_.batch_size);
    std::vector<std::string> chunk;
    for (std::size_t k = start; k < end; ++k) chunk.push_back(texts[miss_first[k]]);
    auto vectors = backend_->Embed(chunk);
    if (vectors.size() != chunk.size()) {
      throw Error(ErrorCode::kTransport, "backend returned wrong vector count");
    }
    {
      std::lock_guard lock(stats_mu_);
      backend_texts_ += chunk.size();
    }
    for (std::size_t k = start; k < end; ++k) {
      EmbeddingVector& v = vectors[k - start];
      CheckDim(v);
      if (cache_) cache_->Put(config_.model_id, keys[miss_first[k]], v);
      fetched[k] = std::move(v);
    }
  }
  std::vector<EmbeddingVector> result;
  result.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (out[i]) {
      CheckDim(*out[i]);
      result.push_back(std::move(*out[i]));
    } else {
      result.push_back(fetched[miss_slot.at(keys[i])]);
    }
  }
  return result;
}

EmbeddingVector EmbeddingProvider::EmbedOne(const std::string& text) {
  return EmbedBatch(std::span<const std::string>(&text, 1)).front();
}

std::size_t EmbeddingProvider::backend_texts_requested() const {
  std::lock_guard lock(stats_mu_);
  return backend_texts_;
}

std::vector<EmbeddingVector> EmbedBatch(std::span<const std::string> texts,
                                        const EmbeddingProviderConfig& config) {
  EmbeddingProvider provider(config);
  return provider.EmbedBatch(texts);
}

}  // namespace biasaudit
