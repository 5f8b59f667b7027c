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

#ifndef BIASAUDIT_EMBEDDING_H_
#define BIASAUDIT_EMBEDDING_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasaudit/util.h"

namespace biasaudit {

// Fixed-dimension real vector. Construction rejects empty or non-finite
// input, and a vector flagged normalized must have unit L2 norm.
class EmbeddingVector {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values, bool normalized = false);

  std::size_t dim() const { return values_.size(); }
  bool normalized() const { return normalized_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double Norm() const;

  // Component-wise equality; the normalized flag is metadata.
  friend bool operator==(const EmbeddingVector& a, const EmbeddingVector& b) {
    return a.values_ == b.values_;
  }

 private:
  std::vector<double> values_;
  bool normalized_ = false;
};

double Dot(const EmbeddingVector& a, const EmbeddingVector& b);

// Throws Error(kZeroVector) for a zero-norm input.
EmbeddingVector Normalize(const EmbeddingVector& v);

// <a,b> / (|a||b|) clamped to [-1, 1]. Throws kDimensionMismatch or
// kZeroVector.
double Cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Seeded pseudo-random unit vector that is a pure function of
// (text, dim, seed). Components come from SHA-256 blocks mapped to
// [-1, 1) with integer arithmetic only, so results are bitwise identical
// across platforms.
EmbeddingVector DeterministicEmbed(std::string_view text, std::size_t dim,
                                   std::uint64_t seed);

// Content address of a text: hex SHA-256 of its UTF-8 bytes.
std::string EmbeddingCacheKey(std::string_view text);

enum class EmbeddingBackend { kCacheOnly, kRemoteHttp, kDeterministicTest };

struct EmbeddingProviderConfig {
  EmbeddingBackend backend = EmbeddingBackend::kDeterministicTest;
  std::string model_id = "deterministic-test";
  std::optional<std::string> endpoint;
  std::optional<std::filesystem::path> cache_path;
  std::size_t batch_size = 32;
  // deterministic_test only
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  // remote_http only
  int max_retries = 3;
  double retry_backoff_seconds = 0.5;
  double timeout_seconds = 60.0;

  void Validate() const;
};

EmbeddingProviderConfig EmbeddingConfigFromJson(const Json& j);
Json ToJson(const EmbeddingProviderConfig& config);

// Line-JSON store of {"key", "model", "dim", "v"} records. Reads may run
// concurrently; writes append one line at a time under a single lock.
class EmbeddingCache {
 public:
  // Loads `path` when it exists; the file is created on the first Put.
  explicit EmbeddingCache(std::filesystem::path path);

  std::optional<EmbeddingVector> Get(std::string_view model,
                                     std::string_view key) const;
  void Put(std::string_view model, std::string_view key,
           const EmbeddingVector& v);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::map<std::pair<std::string, std::string>, EmbeddingVector, std::less<>>
      entries_;
};

// A source of fresh vectors; implementations must tolerate concurrent calls.
class EmbeddingBackendClient {
 public:
  virtual ~EmbeddingBackendClient() = default;
  virtual std::vector<EmbeddingVector> Embed(
      std::span<const std::string> texts) = 0;
};

class DeterministicBackend : public EmbeddingBackendClient {
 public:
  DeterministicBackend(std::size_t dim, std::uint64_t seed)
      : dim_(dim), seed_(seed) {}
  std::vector<EmbeddingVector> Embed(
      std::span<const std::string> texts) override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Client for POST {endpoint}/embed with bounded exponential-backoff retries.
class RemoteHttpBackend : public EmbeddingBackendClient {
 public:
  RemoteHttpBackend(std::string endpoint, std::string model, int max_retries,
                    double backoff_seconds, double timeout_seconds);
  std::vector<EmbeddingVector> Embed(
      std::span<const std::string> texts) override;

 private:
  std::string endpoint_;
  std::string model_;
  int max_retries_;
  double backoff_seconds_;
  double timeout_seconds_;
};

struct EmbedServiceHealth {
  std::string status;
  std::string model;
  std::size_t dim = 0;
};
EmbedServiceHealth QueryEmbedServiceHealth(std::string_view endpoint,
                                           double timeout_seconds = 10.0);

// Cache-fronted embedding provider. Cache hits never reach the backend;
// misses are fetched in batch_size chunks and written through to the cache.
class EmbeddingProvider {
 public:
  explicit EmbeddingProvider(EmbeddingProviderConfig config);
  // Custom backend (tests, adapters); `config.backend` is ignored.
  EmbeddingProvider(EmbeddingProviderConfig config,
                    std::unique_ptr<EmbeddingBackendClient> backend);

  std::vector<EmbeddingVector> EmbedBatch(std::span<const std::string> texts);
  EmbeddingVector EmbedOne(const std::string& text);

  const std::string& model_id() const { return config_.model_id; }
  const EmbeddingProviderConfig& config() const { return config_; }
  std::size_t backend_texts_requested() const;

 private:
  void CheckDim(const EmbeddingVector& v);

  EmbeddingProviderConfig config_;
  std::unique_ptr<EmbeddingBackendClient> backend_;
  std::unique_ptr<EmbeddingCache> cache_;
  mutable std::mutex stats_mu_;
  std::size_t backend_texts_ = 0;
  std::size_t dim_ = 0;
};

// One-shot convenience wrapper constructing a provider from `config`.
std::vector<EmbeddingVector> EmbedBatch(std::span<const std::string> texts,
                                        const EmbeddingProviderConfig& config);

}  // namespace biasaudit

#endif  // BIASAUDIT_EMBEDDING_H_
