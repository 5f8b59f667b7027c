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
#include <cstdlib>
#include <thread>

#include "biasaudit/generation.h"
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

const std::string kSevenEn =
    "I checked the plans twice. The site was quiet at dawn. My team arrived early. "
    "We reviewed each beam carefully. The client asked for changes. I agreed after some thought. "
    "The design is now complete.";
const std::string kSevenHi =
    "मैंने योजना दो बार जाँची। सुबह साइट शांत थी। मेरी टीम जल्दी पहुँची। हमने हर बीम को ध्यान से देखा। "
    "ग्राहक ने बदलाव माँगे। मैंने सोचकर हामी भरी। डिज़ाइन अब पूरा है।";

OccupationSpec Occ(const std::string& name) {
  return {name, Gender::kMale, "Project blueprint", "Develops a detailed design."};
}

GenerationParams Params() {
  GenerationParams p;
  p.model_name = "mock-model";
  p.provider_id = "mock";
  return p;
}

std::vector<PersonaCondition> FiveConditions() {
  std::vector<PersonaCondition> out;
  for (const char* n : {"Engineer", "Pilot", "Mechanic", "Farmer", "Driver"}) {
    out.push_back(MakeCondition(PersonaGender::kMale, Occ(n), std::nullopt, Language::kEn));
  }
  return out;
}

class FakeChatServer {
 public:
  FakeChatServer(int fail_first, int fail_status)
      : fail_first_(fail_first), fail_status_(fail_status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = Json::parse(req.body);
      if (requests_ <= fail_first_) {
        res.status = fail_status_;
        return;
      }
      const Json reply = {{"choices", Json::array({{{"message", {{"role", "assistant"},
                                                                 {"content", kSevenEn}}}}})}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeChatServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int requests() const { return requests_; }
  std::string last_auth() const { return last_auth_; }
  Json last_body() const { return last_body_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  int fail_first_;
  int fail_status_;
  std::string last_auth_;
  Json last_body_;
};

}  // namespace

TEST_SUITE("generation") {
  TEST_CASE("qc examples") {
    CHECK(QcCheck(kSevenEn, Language::kEn).passed);
    CHECK(QcCheck(kSevenHi, Language::kHi).passed);
    const auto few = QcCheck("One sentence. Two sentences.", Language::kEn);
    CHECK_FALSE(few.passed);
    CHECK(few.reasons == std::vector<QcReason>{QcReason::kTooFewSentences});
    const auto latin = QcCheck(kSevenEn, Language::kHi);
    CHECK(std::find(latin.reasons.begin(), latin.reasons.end(), QcReason::kWrongScript) !=
          latin.reasons.end());
    CHECK(QcCheck("   ", Language::kEn).reasons == std::vector<QcReason>{QcReason::kEmpty});
    std::string many;
    for (int i = 0; i < 15; ++i) many += "Sentence number " + std::to_string(i) + " ends here. ";
    const auto m = QcCheck(many, Language::kEn);
    CHECK(std::find(m.reasons.begin(), m.reasons.end(), QcReason::kTooManySentences) !=
          m.reasons.end());
    const auto cut = QcCheck(kSevenEn + " And then", Language::kEn);
    CHECK(std::find(cut.reasons.begin(), cut.reasons.end(), QcReason::kTruncationSuspected) !=
          cut.reasons.end());
    for (auto r : {QcReason::kTooFewSentences, QcReason::kTooManySentences, QcReason::kWrongScript,
                   QcReason::kEmpty, QcReason::kTruncationSuspected})
      CHECK(ParseQcReason(ToString(r)) == r);
  }

  TEST_CASE("script share") {
    CHECK(ScriptShare("abc def", Language::kEn) == 1.0);
    CHECK(ScriptShare("abc def", Language::kHi) == 0.0);
    CHECK(ScriptShare("मैं", Language::kHi) == 1.0);
    CHECK(ScriptShare("ab मैं", Language::kHi) == doctest::Approx(0.6));
  }

  TEST_CASE("happy path is one attempt") {
    FunctionProvider p([](const std::string&, const GenerationParams&) { return kSevenEn; });
    const auto cond = FiveConditions()[0];
    const auto a = GenerateOne(cond, Params(), p);
    CHECK(a.qc.passed);
    CHECK(a.attempt == 1);
    CHECK(a.story_id == "mock-model:" + cond.condition_id + ":0");
    CHECK(a.condition_id == cond.condition_id);
  }

  TEST_CASE("empty twice then valid passes on attempt three") {
    int calls = 0;
    FunctionProvider p([&](const std::string&, const GenerationParams&) {
      return ++calls <= 2 ? std::string() : kSevenEn;
    });
    const auto a = GenerateOne(FiveConditions()[0], Params(), p);
    CHECK(a.qc.passed);
    CHECK(a.attempt == 3);
  }

  TEST_CASE("latin text for a hindi condition fails after max retries") {
    int calls = 0;
    FunctionProvider p([&](const std::string&, const GenerationParams&) {
      ++calls;
      return kSevenEn;
    });
    const auto cond = MakeCondition(PersonaGender::kFemale, Occ("Engineer"), std::nullopt, Language::kHi);
    const auto a = GenerateOne(cond, Params(), p);
    CHECK_FALSE(a.qc.passed);
    CHECK(calls == 1 + Params().max_retries);
    CHECK(a.attempt == 1 + Params().max_retries);
    CHECK(std::find(a.qc.reasons.begin(), a.qc.reasons.end(), QcReason::kWrongScript) !=
          a.qc.reasons.end());
  }

  TEST_CASE("params validation") {
    auto p = Params();
    p.temperature = -1;
    CHECK(CodeOf([&] { p.Validate(); }) == ErrorCode::kInvalidArgument);
    p = Params();
    p.top_p = 1.5;
    CHECK(CodeOf([&] { p.Validate(); }) == ErrorCode::kInvalidArgument);
    p = Params();
    p.max_retries = -1;
    CHECK(CodeOf([&] { p.Validate(); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("artifact json round trip") {
    Artifact a{"m:c:0", "c", "m", kSevenHi, "2026-01-01T00:00:00Z", 2,
               QcVerdict{false, {QcReason::kWrongScript}}};
    const auto b = ArtifactFromJson(ToJson(a));
    CHECK(b.text == a.text);
    CHECK(b.attempt == 2);
    CHECK(b.qc.reasons == a.qc.reasons);
  }

  TEST_CASE("batch bookkeeping with one permanent failure, then idempotent rerun") {
    const auto dir = oracle::TempDir("batch");
    FunctionProvider p([](const std::string& prompt, const GenerationParams&) {
      return prompt.find("Farmer") != std::string::npos ? std::string("Too short.") : kSevenEn;
    });
    const auto grid = FiveConditions();
    ArtifactStore store(dir / "a.jsonl");
    const auto r = RunBatch(grid, Params(), p, store);
    CHECK(r.n_ok == 4);
    CHECK(r.n_failed == 1);
    CHECK(store.CountPassed() == 4);
    CHECK(store.CountFailed() == 1);
    const std::string before = ReadFile(dir / "a.jsonl");

    FunctionProvider good([](const std::string&, const GenerationParams&) { return kSevenEn; });
    ArtifactStore reopened(dir / "a.jsonl");
    const std::vector<PersonaCondition> passed = {grid[0], grid[1], grid[2], grid[4]};
    const auto again = RunBatch(passed, Params(), good, reopened);
    CHECK(again.n_ok == 0);
    CHECK(again.n_skipped == 4);
    CHECK(ReadFile(dir / "a.jsonl") == before);
    CHECK(LoadArtifacts(dir / "a.jsonl").size() == 5);
  }

  TEST_CASE("interrupt after three of five, resume generates exactly two") {
    const auto dir = oracle::TempDir("resume");
    const auto grid = FiveConditions();
    std::atomic<bool> cancel{false};
    std::atomic<int> calls{0};
    FunctionProvider p([&](const std::string&, const GenerationParams&) {
      if (++calls == 3) cancel = true;
      return kSevenEn;
    });
    {
      ArtifactStore store(dir / "a.jsonl");
      BatchOptions opts;
      opts.cancel = &cancel;
      const auto r = RunBatch(grid, Params(), p, store, opts);
      CHECK(r.cancelled);
      CHECK(r.n_ok == 3);
    }
    const auto first = LoadArtifacts(dir / "a.jsonl");
    REQUIRE(first.size() == 3);
    calls = 0;
    ArtifactStore store(dir / "a.jsonl");
    std::atomic<bool> never{false};
    BatchOptions opts;
    opts.cancel = &never;
    opts.workers = 2;
    const auto r = RunBatch(grid, Params(), p, store, opts);
    CHECK(r.n_ok == 2);
    CHECK(r.n_skipped == 3);
    CHECK(calls == 2);
    const auto after = LoadArtifacts(dir / "a.jsonl");
    REQUIRE(after.size() == 5);
    std::set<std::string> ids;
    for (const auto& a : after) ids.insert(a.condition_id);
    CHECK(ids.size() == 5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(after[i].story_id == first[i].story_id);
  }

  TEST_CASE("transport errors are counted and store nothing") {
    const auto dir = oracle::TempDir("transport");
    FunctionProvider p([](const std::string& prompt, const GenerationParams&) -> std::string {
      if (prompt.find("Pilot") != std::string::npos) throw Error(ErrorCode::kTransport, "down");
      return kSevenEn;
    });
    const auto grid = FiveConditions();
    ArtifactStore store(dir / "a.jsonl");
    BatchOptions opts;
    opts.workers = 3;
    const auto r = RunBatch(grid, Params(), p, store, opts);
    CHECK(r.n_ok == 4);
    CHECK(r.n_transport == 1);
    CHECK(store.Artifacts().size() == 4);

    FunctionProvider auth([](const std::string&, const GenerationParams&) -> std::string {
      throw Error(ErrorCode::kAuthentication, "bad key");
    });
    ArtifactStore other(dir / "b.jsonl");
    CHECK(CodeOf([&] { RunBatch(grid, Params(), auth, other); }) == ErrorCode::kAuthentication);
  }

  TEST_CASE("transcript provider is deterministic and model sensitive") {
    const Json spec = {{"sentences_per_story", 3},
                       {"pools",
                        {{"en", {"A one.", "B two.", "C three.", "D four.", "E five."}},
                         {"hi", {"क।", "ख।", "ग।"}}}},
                       {"responses", Json::object()}};
    TranscriptProvider t(spec);
    const auto cond = FiveConditions()[0];
    const std::string prompt = RenderPrompt(cond);
    auto pa = Params();
    const std::string a1 = t.Complete(prompt, pa);
    CHECK(a1 == t.Complete(prompt, pa));
    CHECK(SegmentSentences(a1, Language::kEn).size() == 3);
    const auto hi = MakeCondition(PersonaGender::kMale, Occ("Engineer"), std::nullopt, Language::kHi);
    CHECK(ScriptShare(t.Complete(RenderPrompt(hi), pa), Language::kHi) == 1.0);

    Json recorded = spec;
    recorded["responses"][Sha256Hex(prompt)] = "Recorded.";
    TranscriptProvider r(recorded);
    CHECK(r.Complete(prompt, pa) == "Recorded.");
    CHECK(CodeOf([&] { t.Complete("unrelated prompt", pa); }) == ErrorCode::kNotFound);
  }

  TEST_CASE("api key env var naming") {
    CHECK(ApiKeyEnvVar("openai") == "BIASAUDIT_OPENAI_API_KEY");
    CHECK(ApiKeyEnvVar("my-llm.v2") == "BIASAUDIT_MY_LLM_V2_API_KEY");
  }
}

TEST_SUITE("generation-http") {
  TEST_CASE("missing credential is an authentication error") {
    ::unsetenv("BIASAUDIT_NOKEY_API_KEY");
    HttpChatConfig cfg;
    cfg.provider_id = "nokey";
    cfg.endpoint = "http://127.0.0.1:1";
    CHECK(CodeOf([&] { HttpChatProvider p(cfg); }) == ErrorCode::kAuthentication);
  }

  TEST_CASE("chat adapter sends sampling params and parses the reply") {
    ::setenv("BIASAUDIT_TESTCHAT_API_KEY", "secret-token", 1);
    FakeChatServer server(2, 503);
    HttpChatConfig cfg;
    cfg.provider_id = "testchat";
    cfg.endpoint = server.endpoint();
    cfg.requests_per_second = 1000;
    cfg.retry_backoff_seconds = 0.01;
    HttpChatProvider p(cfg);
    auto params = Params();
    const std::string out = p.Complete("hello", params);
    CHECK(out == kSevenEn);
    CHECK(server.requests() == 3);
    CHECK(server.last_auth() == "Bearer secret-token");
    const Json body = server.last_body();
    CHECK(body["model"] == "mock-model");
    CHECK(body["temperature"] == 0.7);
    CHECK(body["top_p"] == 0.9);
    CHECK(body["messages"][0]["content"] == "hello");

    params.provider_defaults = true;
    p.Complete("again", params);
    CHECK_FALSE(server.last_body().contains("temperature"));
    CHECK_FALSE(server.last_body().contains("top_p"));
  }

  TEST_CASE("401 is an authentication error without retries") {
    ::setenv("BIASAUDIT_TESTCHAT_API_KEY", "wrong", 1);
    FakeChatServer server(100, 401);
    HttpChatConfig cfg;
    cfg.provider_id = "testchat";
    cfg.endpoint = server.endpoint();
    cfg.requests_per_second = 1000;
    HttpChatProvider p(cfg);
    CHECK(CodeOf([&] { p.Complete("x", Params()); }) == ErrorCode::kAuthentication);
    CHECK(server.requests() == 1);
  }

  TEST_CASE("429 exhaustion is a transport error") {
    ::setenv("BIASAUDIT_TESTCHAT_API_KEY", "k", 1);
    FakeChatServer server(100, 429);
    HttpChatConfig cfg;
    cfg.provider_id = "testchat";
    cfg.endpoint = server.endpoint();
    cfg.requests_per_second = 1000;
    cfg.retry_backoff_seconds = 0.01;
    cfg.max_transport_retries = 2;
    HttpChatProvider p(cfg);
    CHECK(CodeOf([&] { p.Complete("x", Params()); }) == ErrorCode::kTransport);
    CHECK(server.requests() == 3);
  }
}
