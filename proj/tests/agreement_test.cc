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

#include <random>

#include "biasaudit/agreement.h"
#include "doctest.h"
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

using Rows = std::vector<std::vector<std::string>>;

AnnotationSet Set(const Rows& labels, std::vector<std::string> truth = {}) {
  AnnotationSet s;
  s.n_annotators = labels.front().size();
  std::map<std::string, std::string> tm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    AnnotationItem it;
    it.pair_id = "p" + std::to_string(i);
    it.occupation = "Teacher";
    it.gender = i % 2 ? Gender::kFemale : Gender::kMale;
    it.labels = labels[i];
    if (!truth.empty()) tm[it.pair_id] = truth[i];
    s.items.push_back(it);
  }
  if (!truth.empty()) s.truth_map = tm;
  return s;
}

}  // namespace

TEST_SUITE("agreement") {
  TEST_CASE("fleiss examples") {
    CHECK(FleissKappa({{"A", "A", "A"}, {"B", "B", "B"}}).value == 1.0);
    const Rows two = {{"A", "A", "B"}, {"B", "B", "A"}};
    CHECK(std::abs(FleissKappa(two).value - oracle::FleissTable(two)) <= 1e-12);
    const auto deg = FleissKappa({{"A", "A"}, {"A", "A"}});
    CHECK(deg.value == 1.0);
    CHECK(deg.degenerate);
    CHECK(CodeOf([] { FleissKappa({{"A", "B"}, {"A"}}); }) == ErrorCode::kValidation);
    CHECK(CodeOf([] { FleissKappa({{"A", "B"}}); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("cohen examples") {
    const std::vector<std::string> a = {"A", "A", "B", "B"};
    const std::vector<std::string> b = {"B", "B", "A", "A"};
    CHECK(CohenKappa(a, a).value == 1.0);
    CHECK(CohenKappa(a, b).value == -1.0);
    std::vector<std::string> x, y;
    for (int i = 0; i < 20; ++i) {
      x.push_back(i % 3 ? "A" : "B");
      y.push_back(i < 3 ? (x.back() == "A" ? "B" : "A") : x.back());
    }
    CHECK(std::abs(CohenKappa(x, y).value - oracle::CohenConfusion(x, y)) <= 1e-12);
    CHECK(CodeOf([&] { CohenKappa(a, std::vector<std::string>{"A"}); }) == ErrorCode::kValidation);
  }

  TEST_CASE("kappa invariances") {
    std::mt19937_64 rng(4);
    std::bernoulli_distribution coin(0.6);
    Rows labels(30, std::vector<std::string>(4));
    for (auto& row : labels)
      for (auto& l : row) l = coin(rng) ? "A" : "B";
    const double k = FleissKappa(labels).value;
    Rows swapped = labels;
    for (auto& row : swapped)
      for (auto& l : row) l = l == "A" ? "B" : "A";
    CHECK(std::abs(FleissKappa(swapped).value - k) <= 1e-12);
    Rows doubled = labels;
    doubled.insert(doubled.end(), labels.begin(), labels.end());
    CHECK(std::abs(FleissKappa(doubled).value - k) <= 1e-12);
    std::vector<std::string> c0, c1;
    for (const auto& row : labels) {
      c0.push_back(row[0]);
      c1.push_back(row[1]);
    }
    std::vector<std::string> s0, s1;
    for (std::size_t i = 0; i < c0.size(); ++i) {
      s0.push_back(c0[i] == "A" ? "B" : "A");
      s1.push_back(c1[i] == "A" ? "B" : "A");
    }
    CHECK(std::abs(CohenKappa(c0, c1).value - CohenKappa(s0, s1).value) <= 1e-12);
  }

  TEST_CASE("majority vote and ties") {
    const auto votes = MajorityVote(Set({{"A", "A", "B"}, {"B", "B", "B"}}));
    CHECK(votes.at("p0") == "A");
    CHECK(votes.at("p1") == "B");
    const auto rev = MajorityVote(Set({{"B", "A", "A"}, {"B", "B", "B"}}));
    CHECK(rev == votes);
    try {
      MajorityVote(Set({{"A", "A", "B", "B"}}));
      FAIL("expected tie");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kTie);
      CHECK(std::string(e.what()).find("p0") != std::string::npos);
    }
    const auto report = ComputeAgreement(Set({{"A", "A", "B"}, {"B", "B", "B"}}), false);
    CHECK(report.unanimous_pct == 50.0);
  }

  TEST_CASE("detection rate") {
    std::map<std::string, std::string> votes, truth;
    for (int i = 0; i < 50; ++i) {
      const std::string id = "p" + std::to_string(i);
      votes[id] = "A";
      truth[id] = i < 33 ? "A" : "B";
    }
    CHECK(DetectionRate(votes, truth) == doctest::Approx(66.0));
    for (int i = 0; i < 50; ++i) truth["p" + std::to_string(i)] = i % 2 ? "A" : "B";
    CHECK(DetectionRate(votes, truth) == doctest::Approx(50.0));
    CHECK(DetectionRate(votes, votes) == 100.0);
    truth.erase("p7");
    try {
      DetectionRate(votes, truth);
      FAIL("expected coverage error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kCoverage);
      CHECK(std::string(e.what()).find("p7") != std::string::npos);
    }
  }

  TEST_CASE("annotation parsing and report") {
    std::vector<JsonLine> lines;
    lines.push_back({1, Json::parse(R"({"pair_id": "x1", "occupation": "Nurse", "gender": "female",
                                       "labels": ["A", "A", "B"], "personality_side": "A"})")});
    lines.push_back({2, Json::parse(R"({"pair_id": "x2", "occupation": "Pilot", "gender": "male",
                                       "labels": ["B", "B", "B"], "personality_side": "A"})")});
    const auto set = ParseAnnotations(lines, Language::kHi, "mem");
    CHECK(set.n_annotators == 3);
    REQUIRE(set.truth_map.has_value());
    const auto report = ComputeAgreement(set, true);
    CHECK(report.detection_rate_pct.value() == 50.0);
    CHECK(report.pairwise_cohen.count("0-1") == 1);
    CHECK(report.kappa_by_gender.count("female") == 0);  // one item per gender is too few
    CHECK(ToJson(report).contains("fleiss_kappa"));

    auto bad = lines;
    bad[1].value["labels"] = Json::array({"A", "C", "B"});
    CHECK(CodeOf([&] { ParseAnnotations(bad, Language::kHi, "mem"); }) == ErrorCode::kValidation);
    bad = lines;
    bad[1].value["pair_id"] = "x1";
    CHECK(CodeOf([&] { ParseAnnotations(bad, Language::kHi, "mem"); }) == ErrorCode::kValidation);
    bad = lines;
    bad[1].value["labels"] = Json::array({"A", "B"});
    CHECK(CodeOf([&] { ParseAnnotations(bad, Language::kHi, "mem"); }) == ErrorCode::kValidation);
  }
}
