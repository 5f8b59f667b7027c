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

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "biasaudit/centroids.h"
#include "biasaudit/embedding.h"
#include "biasaudit/http.h"
#include "doctest.h"
#include "httplib.h"
#include "oracles.h"

using namespace biasaudit;

namespace {

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kParse;
}

EmbeddingVector V(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

// Serves the embed-service wire protocol from a background thread.
class FakeEmbedService {
 public:
  explicit FakeEmbedService(int fail_first = 0, int fail_status = 503)
      : fail_first_(fail_first), fail_status_(fail_status) {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (requests_ <= fail_first_) {
        res.status = fail_status_;
        res.set_content("busy", "text/plain");
        return;
      }
      const Json body = Json::parse(req.body);
      Json vectors = Json::array();
      for (const auto& t : body.at("texts")) {
        const auto v = DeterministicEmbed(t.get<std::string>(), 8, 3);
        vectors.push_back(std::vector<double>(v.values().begin(), v.values().end()));
      }
      res.set_content(Json{{"dim", 8}, {"vectors", vectors}}.dump(), "application/json");
    });
    server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status": "ok", "model": "fake-encoder", "dim": 8})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEmbedService() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  int fail_first_;
  int fail_status_;
};

}  // namespace

TEST_SUITE("embedding") {
  TEST_CASE("normalize examples") {
    const auto n = Normalize(V({3, 4}));
    CHECK(n[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(n[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(n.normalized());
    const auto u = Normalize(n);
    CHECK(std::abs(u[0] - n[0]) <= 1e-12);
    CHECK(CodeOf([] { Normalize(V({0, 0})); }) == ErrorCode::kZeroVector);
  }

  TEST_CASE("vector construction rejects bad input") {
    CHECK(CodeOf([] { V({}); }) == ErrorCode::kInvalidArgument);
    CHECK(CodeOf([] { V({1.0, NAN}); }) == ErrorCode::kInvalidArgument);
    CHECK(CodeOf([] { EmbeddingVector({1.0, 1.0}, true); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("cosine examples and properties") {
    CHECK(Cosine(V({1, 0}), V({0, 1})) == 0.0);
    CHECK(std::abs(Cosine(V({1, 1}), V({1, 0})) - 1.0 / std::sqrt(2.0)) <= 1e-15);
    CHECK(std::abs(Cosine(V({1, 1}), V({1, 0})) - oracle::CosinePlain({1, 1}, {1, 0})) <= 1e-15);
    CHECK(CodeOf([] { Cosine(V({1, 0}), V({1, 0, 0})); }) == ErrorCode::kDimensionMismatch);
    CHECK(CodeOf([] { Cosine(V({0, 0}), V({1, 0})); }) == ErrorCode::kZeroVector);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
      const auto a = oracle::RandomVector(rng, 16);
      const auto b = oracle::RandomVector(rng, 16);
      CHECK(Cosine(V(a), V(a)) == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(Cosine(V(a), V(b)) == Cosine(V(b), V(a)));
      std::vector<double> scaled = a;
      for (double& x : scaled) x *= 3.7;
      CHECK(std::abs(Cosine(V(scaled), V(b)) - Cosine(V(a), V(b))) <= 1e-12);
      const double c = Cosine(V(a), V(b));
      CHECK(c >= -1.0);
      CHECK(c <= 1.0);
    }
  }

  TEST_CASE("deterministic embed is pure, unit norm and text sensitive") {
    const auto a = DeterministicEmbed("hello", 64, 7);
    const auto b = DeterministicEmbed("hello", 64, 7);
    CHECK(a == b);
    CHECK(std::abs(a.Norm() - 1.0) <= 1e-9);
    CHECK_FALSE(DeterministicEmbed("hellp", 64, 7) == a);
    CHECK_FALSE(DeterministicEmbed("hello", 64, 8) == a);
    CHECK(DeterministicEmbed("hello", 100, 7).dim() == 100);
  }

  TEST_CASE("cache key is the sha256 of the text") {
    CHECK(EmbeddingCacheKey("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("cache put/get round trip survives reload exactly") {
    const auto dir = oracle::TempDir("cache");
    std::mt19937_64 rng(1);
    const auto v = oracle::RandomEmbedding(rng, 12);
    {
      EmbeddingCache cache(dir / "c.jsonl");
      cache.Put("m", "k1", v);
      CHECK(cache.Get("m", "k1").value() == v);
      CHECK_FALSE(cache.Get("other", "k1").has_value());
    }
    EmbeddingCache reloaded(dir / "c.jsonl");
    CHECK(reloaded.size() == 1);
    const auto back = reloaded.Get("m", "k1").value();
    for (std::size_t i = 0; i < v.dim(); ++i) CHECK(back[i] == v[i]);
  }

  TEST_CASE("deterministic backend: same text twice gives identical vectors") {
    EmbeddingProviderConfig cfg;
    cfg.dim = 16;
    cfg.seed = 2;
    const std::vector<std::string> texts = {"x", "x"};
    const auto out = EmbedBatch(texts, cfg);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == out[1]);
  }

  TEST_CASE("cache hits never reach the backend; partition invariance") {
    const auto dir = oracle::TempDir("hits");
    EmbeddingProviderConfig cfg;
    cfg.dim = 8;
    cfg.cache_path = dir / "c.jsonl";
    cfg.batch_size = 2;
    const std::vector<std::string> texts = {"a", "b", "c", "d", "e"};
    EmbeddingProvider p(cfg);
    const auto all = p.EmbedBatch(texts);
    CHECK(p.backend_texts_requested() == 5);
    const auto again = p.EmbedBatch(texts);
    CHECK(p.backend_texts_requested() == 5);
    CHECK(all == again);

    EmbeddingProvider fresh(cfg, std::make_unique<DeterministicBackend>(8, 0));
    std::vector<EmbeddingVector> parts;
    for (std::size_t i = 0; i < texts.size(); i += 2) {
      const std::vector<std::string> chunk(texts.begin() + i,
                                           texts.begin() + std::min(texts.size(), i + 2));
      for (auto& v : fresh.EmbedBatch(chunk)) parts.push_back(v);
    }
    CHECK(parts == all);
  }

  TEST_CASE("cache_only: complete cache works, a missing text names its key") {
    const auto dir = oracle::TempDir("cacheonly");
    EmbeddingProviderConfig warm;
    warm.dim = 8;
    warm.cache_path = dir / "c.jsonl";
    const std::vector<std::string> texts = {"one", "two"};
    const auto expected = EmbedBatch(texts, warm);

    EmbeddingProviderConfig cold = warm;
    cold.backend = EmbeddingBackend::kCacheOnly;
    CHECK(EmbedBatch(texts, cold) == expected);
    const std::vector<std::string> more = {"one", "three"};
    try {
      EmbedBatch(more, cold);
      FAIL("expected cache miss");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kCacheMiss);
      CHECK(std::string(e.what()).find(EmbeddingCacheKey("three")) != std::string::npos);
    }
  }

  TEST_CASE("empty batch and mixed dims are rejected") {
    EmbeddingProviderConfig cfg;
    CHECK(CodeOf([&] { EmbedBatch(std::vector<std::string>{}, cfg); }) == ErrorCode::kEmptyInput);
    std::map<std::string, EmbeddingVector> table = {{"a", V({1, 0})}, {"b", V({1, 0, 0})}};
    EmbeddingProvider p(cfg, std::make_unique<oracle::MapBackend>(table));
    const std::vector<std::string> texts = {"a", "b"};
    CHECK(CodeOf([&] { p.EmbedBatch(texts); }) == ErrorCode::kDimensionMismatch);
  }

  TEST_CASE("provider is safe under concurrent callers") {
    const auto dir = oracle::TempDir("concurrent");
    EmbeddingProviderConfig cfg;
    cfg.dim = 8;
    cfg.cache_path = dir / "c.jsonl";
    EmbeddingProvider p(cfg);
    std::vector<std::thread> threads;
    std::atomic<int> mismatches{0};
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 50; ++i) {
          const std::string text = "s" + std::to_string((i + t) % 20);
          if (!(p.EmbedOne(text) == DeterministicEmbed(text, 8, 0))) ++mismatches;
        }
      });
    }
    for (auto& th : threads) th.join();
    CHECK(mismatches == 0);
    EmbeddingCache reloaded(dir / "c.jsonl");
    CHECK(reloaded.size() == 20);
  }

  TEST_CASE("config parsing and validation") {
    const auto cfg = EmbeddingConfigFromJson(
        Json{{"backend", "remote_http"}, {"model_id", "enc"}, {"endpoint", "http://x:1"}});
    CHECK(cfg.backend == EmbeddingBackend::kRemoteHttp);
    CHECK(cfg.max_retries == 3);
    CHECK(cfg.retry_backoff_seconds == 0.5);
    CHECK(CodeOf([] { EmbeddingConfigFromJson(Json{{"backend", "remote_http"}}).Validate(); }) ==
          ErrorCode::kValidation);
  }
}

TEST_SUITE("embedding-wire") {
  TEST_CASE("endpoint splitting") {
    CHECK(SplitEndpoint("http://h:9/v1") == std::pair<std::string, std::string>{"http://h:9", "/v1"});
    CHECK(SplitEndpoint("http://h:9").second.empty());
    CHECK(CodeOf([] { SplitEndpoint("ftp://h"); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("remote backend speaks the embed protocol and health") {
    FakeEmbedService svc;
    const auto health = QueryEmbedServiceHealth(svc.endpoint());
    CHECK(health.status == "ok");
    CHECK(health.dim == 8);
    RemoteHttpBackend backend(svc.endpoint(), "fake-encoder", 3, 0.01, 5.0);
    const std::vector<std::string> texts = {"a", "b"};
    const auto out = backend.Embed(texts);
    REQUIRE(out.size() == 2);
    CHECK(out[0].dim() == out[1].dim());
    CHECK(out[1] == DeterministicEmbed("b", 8, 3));
  }

  TEST_CASE("5xx is retried with backoff") {
    FakeEmbedService svc(2, 503);
    RemoteHttpBackend backend(svc.endpoint(), "m", 3, 0.01, 5.0);
    const std::vector<std::string> texts = {"a"};
    CHECK(backend.Embed(texts).size() == 1);
    CHECK(svc.requests() == 3);
  }

  TEST_CASE("retry exhaustion is a transport error") {
    FakeEmbedService svc(100, 500);
    RemoteHttpBackend backend(svc.endpoint(), "m", 3, 0.01, 5.0);
    const std::vector<std::string> texts = {"a"};
    CHECK(CodeOf([&] { backend.Embed(texts); }) == ErrorCode::kTransport);
    CHECK(svc.requests() == 4);
  }

  TEST_CASE("4xx is not retried") {
    FakeEmbedService svc(100, 400);
    RemoteHttpBackend backend(svc.endpoint(), "m", 3, 0.01, 5.0);
    const std::vector<std::string> texts = {"a"};
    CHECK(CodeOf([&] { backend.Embed(texts); }) == ErrorCode::kTransport);
    CHECK(svc.requests() == 1);
  }

  TEST_CASE("unreachable service is a transport error") {
    RemoteHttpBackend backend("http://127.0.0.1:1", "m", 1, 0.01, 1.0);
    const std::vector<std::string> texts = {"a"};
    CHECK(CodeOf([&] { backend.Embed(texts); }) == ErrorCode::kTransport);
  }
}

TEST_SUITE("centroids") {
  TEST_CASE("spec examples") {
    const auto v = V({2, 1, -1});
    const std::vector<EmbeddingVector> twice = {v, v};
    const auto c = BuildCentroids(twice, twice);
    const auto nv = Normalize(v);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(c.male[i] - nv[i]) <= 1e-15);
    CHECK(c.n_male == 2);

    const std::vector<EmbeddingVector> axes = {V({1, 0}), V({0, 1})};
    const auto mean = MeanVector(axes);
    CHECK(mean[0] == 0.5);
    CHECK(mean[1] == 0.5);
    const auto c2 = BuildCentroids(axes, axes);
    CHECK(std::abs(c2.female[0] - 1.0 / std::sqrt(2.0)) <= 1e-15);
  }

  TEST_CASE("random centroid matches a summation oracle") {
    std::mt19937_64 rng(11);
    std::vector<EmbeddingVector> male;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 5; ++i) {
      raw.push_back(oracle::RandomVector(rng, 10));
      male.push_back(Normalize(V(raw.back())));
    }
    std::vector<double> sum(10, 0.0);
    for (const auto& m : male)
      for (std::size_t d = 0; d < 10; ++d) sum[d] += m[d] / 5.0;
    const double norm = std::sqrt(oracle::DotPlain(sum, sum));
    const auto c = BuildCentroids(male, male);
    for (std::size_t d = 0; d < 10; ++d) CHECK(std::abs(c.male[d] - sum[d] / norm) <= 1e-12);

    std::vector<EmbeddingVector> shuffled = male;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto cs = BuildCentroids(shuffled, male);
    for (std::size_t d = 0; d < 10; ++d) CHECK(std::abs(cs.male[d] - c.male[d]) <= 1e-12);

    std::vector<EmbeddingVector> extended = male;
    extended.push_back(MeanVector(male));
    const auto ce = BuildCentroids(extended, male);
    CHECK(Cosine(ce.male, c.male) >= 1.0 - 1e-12);
  }

  TEST_CASE("centroid errors") {
    const std::vector<EmbeddingVector> one = {V({1, 0})};
    const std::vector<EmbeddingVector> none;
    CHECK(CodeOf([&] { BuildCentroids(none, one); }) == ErrorCode::kEmptyInput);
    const std::vector<EmbeddingVector> mixed = {V({1, 0}), V({1, 0, 0})};
    CHECK(CodeOf([&] { BuildCentroids(mixed, one); }) == ErrorCode::kDimensionMismatch);
    const std::vector<EmbeddingVector> cancel = {V({1, 0}), V({-1, 0})};
    CHECK(CodeOf([&] { BuildCentroids(cancel, one); }) == ErrorCode::kZeroVector);
  }

  TEST_CASE("centroid file round trip") {
    const auto dir = oracle::TempDir("centroids");
    std::mt19937_64 rng(3);
    const std::vector<EmbeddingVector> m = {oracle::RandomEmbedding(rng, 6)};
    const std::vector<EmbeddingVector> f = {oracle::RandomEmbedding(rng, 6)};
    auto c = BuildCentroids(m, f);
    c.language = Language::kHi;
    c.model_id = "enc";
    SaveCentroids(dir / "c.json", c);
    const auto back = LoadCentroids(dir / "c.json");
    CHECK(back.male == c.male);
    CHECK(back.female == c.female);
    CHECK(back.language == Language::kHi);
    CHECK(back.model_id == "enc");
    const Json j = Json::parse(ReadFile(dir / "c.json"));
    for (const char* key : {"language", "model", "dim", "n_male", "n_female", "male", "female"})
      CHECK(j.contains(key));
  }

  TEST_CASE("weat matches the oracle and negates on swap") {
    auto embed = [](const std::string& prefix, int n) {
      std::vector<EmbeddingVector> out;
      for (int i = 0; i < n; ++i) out.push_back(DeterministicEmbed(prefix + std::to_string(i), 8, 7));
      return out;
    };
    auto raw = [](const std::vector<EmbeddingVector>& vs) {
      std::vector<std::vector<double>> out;
      for (const auto& v : vs) out.emplace_back(v.values().begin(), v.values().end());
      return out;
    };
    const auto tm = embed("tm", 4), tf = embed("tf", 4), am = embed("am", 3), af = embed("af", 3);
    const auto r = WeatEffectSize(tm, tf, am, af);
    CHECK(std::abs(r.effect_size_d - oracle::WeatD(raw(tm), raw(tf), raw(am), raw(af))) <= 1e-10);
    CHECK(std::abs(r.effect_size_d - (r.mean_assoc_male - r.mean_assoc_female) / r.pooled_std) <=
          1e-12);
    CHECK(r.n_targets_male == 4);
    // Swapping targets and attributes together negates twice.
    const auto mirrored = WeatEffectSize(tf, tm, af, am);
    CHECK(mirrored.effect_size_d == r.effect_size_d);
    const auto target_swap = WeatEffectSize(tf, tm, am, af);
    CHECK(target_swap.effect_size_d == -r.effect_size_d);
    const auto attr_swap = WeatEffectSize(tm, tf, af, am);
    CHECK(attr_swap.effect_size_d == -r.effect_size_d);
  }

  TEST_CASE("weat degenerate variance") {
    const std::vector<EmbeddingVector> same = {V({1, 0}), V({1, 0})};
    const std::vector<EmbeddingVector> attr = {V({0.3, 0.7})};
    CHECK(CodeOf([&] { WeatEffectSize(same, same, attr, attr); }) == ErrorCode::kDegenerate);
  }
}
