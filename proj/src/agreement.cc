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

#include "biasaudit/agreement.h"

#include <algorithm>
#include <set>

namespace biasaudit {
namespace {

KappaResult FromAgreement(double observed, double chance) {
  if (chance >= 1.0) return {1.0, true};
  return {(observed - chance) / (1.0 - chance), false};
}

Json ToJson(const KappaResult& k) {
  return Json{{"kappa", k.value}, {"degenerate", k.degenerate}};
}

}  // namespace

KappaResult FleissKappa(const std::vector<std::vector<std::string>>& labels) {
  if (labels.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "Fleiss' kappa needs >= 2 items");
  }
  const std::size_t raters = labels.front().size();
  if (raters < 2) {
    throw Error(ErrorCode::kInvalidArgument, "Fleiss' kappa needs >= 2 raters");
  }
  std::map<std::string, std::size_t> totals;
  double p_bar = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != raters) {
      throw Error(ErrorCode::kValidation,
                  "ragged label matrix: item " + std::to_string(i) + " has " +
                      std::to_string(labels[i].size()) + " labels, expected " +
                      std::to_string(raters));
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels[i]) ++counts[l];
    double agree = 0.0;
    for (const auto& [cat, n] : counts) {
      agree += static_cast<double>(n) * static_cast<double>(n - 1);
      totals[cat] += n;
    }
    p_bar += agree / (static_cast<double>(raters) * static_cast<double>(raters - 1));
  }
  const double n_items = static_cast<double>(labels.size());
  p_bar /= n_items;
  double p_e = 0.0;
  for (const auto& [cat, n] : totals) {
    const double p = static_cast<double>(n) / (n_items * static_cast<double>(raters));
    p_e += p * p;
  }
  return FromAgreement(p_bar, p_e);
}

KappaResult CohenKappa(std::span<const std::string> a,
                       std::span<const std::string> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kValidation,
                "Cohen's kappa length mismatch: " + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()));
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "Cohen's kappa needs >= 2 labels");
  }
  std::map<std::string, std::size_t> ma, mb;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ma[a[i]];
    ++mb[b[i]];
    if (a[i] == b[i]) ++same;
  }
  const double n = static_cast<double>(a.size());
  double p_e = 0.0;
  for (const auto& [cat, ca] : ma) {
    auto it = mb.find(cat);
    if (it == mb.end()) continue;
    p_e += (static_cast<double>(ca) / n) * (static_cast<double>(it->second) / n);
  }
  return FromAgreement(static_cast<double>(same) / n, p_e);
}

AnnotationSet ParseAnnotations(const std::vector<JsonLine>& lines,
                               Language language, std::string_view source) {
  AnnotationSet set;
  set.language = language;
  std::set<std::string> ids;
  std::map<std::string, std::string> truth;
  bool all_have_truth = true;
  for (const auto& line : lines) {
    const std::string where =
        std::string(source) + ":" + std::to_string(line.line_number);
    const Json& j = line.value;
    AnnotationItem item;
    try {
      item.pair_id = j.at("pair_id").get<std::string>();
      item.occupation = j.value("occupation", std::string());
      item.gender = ParseGender(j.at("gender").get<std::string>());
      item.labels = j.at("labels").get<std::vector<std::string>>();
      if (j.contains("personality_side")) {
        item.personality_side = j.at("personality_side").get<std::string>();
      }
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    for (const auto& l : item.labels) {
      if (l != "A" && l != "B") {
        throw Error(ErrorCode::kValidation,
                    where + ": label '" + l + "' is not A or B");
      }
    }
    if (item.personality_side && *item.personality_side != "A" &&
        *item.personality_side != "B") {
      throw Error(ErrorCode::kValidation,
                  where + ": personality_side must be A or B");
    }
    if (!ids.insert(item.pair_id).second) {
      throw Error(ErrorCode::kValidation,
                  where + ": duplicate pair_id '" + item.pair_id + "'");
    }
    if (set.items.empty()) {
      set.n_annotators = item.labels.size();
    } else if (item.labels.size() != set.n_annotators) {
      throw Error(ErrorCode::kValidation,
                  where + ": expected " + std::to_string(set.n_annotators) +
                      " labels, found " + std::to_string(item.labels.size()));
    }
    if (item.personality_side) {
      truth[item.pair_id] = *item.personality_side;
    } else {
      all_have_truth = false;
    }
    set.items.push_back(std::move(item));
  }
  if (all_have_truth && !set.items.empty()) set.truth_map = std::move(truth);
  return set;
}

AnnotationSet LoadAnnotations(const std::filesystem::path& path,
                              Language language) {
  return ParseAnnotations(ReadJsonLines(path), language, path.string());
}

std::map<std::string, std::string> MajorityVote(const AnnotationSet& set) {
  std::map<std::string, std::string> votes;
  for (const auto& item : set.items) {
    std::map<std::string, std::size_t> counts;
    for (const auto& l : item.labels) ++counts[l];
    auto best = std::max_element(
        counts.begin(), counts.end(),
        [](const auto& x, const auto& y) { return x.second < y.second; });
    if (best == counts.end() || 2 * best->second <= item.labels.size()) {
      throw Error(ErrorCode::kTie, "no majority label for pair_id '" +
                                       item.pair_id + "'");
    }
    votes[item.pair_id] = best->first;
  }
  return votes;
}

double DetectionRate(const std::map<std::string, std::string>& votes,
                     const std::map<std::string, std::string>& truth) {
  if (votes.empty()) {
    throw Error(ErrorCode::kEmptyInput, "detection rate over no votes");
  }
  std::vector<std::string> missing;
  std::size_t hits = 0;
  for (const auto& [id, label] : votes) {
    auto it = truth.find(id);
    if (it == truth.end()) {
      missing.push_back(id);
    } else if (it->second == label) {
      ++hits;
    }
  }
  if (!missing.empty()) {
    std::string msg = "truth map lacks pair_ids:";
    for (const auto& id : missing) msg += " " + id;
    throw Error(ErrorCode::kCoverage, msg);
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(votes.size());
}

AgreementReport ComputeAgreement(const AnnotationSet& set, bool by_gender) {
  AgreementReport r;
  r.n_items = set.items.size();
  std::vector<std::vector<std::string>> matrix;
  matrix.reserve(set.items.size());
  std::size_t unanimous = 0;
  for (const auto& item : set.items) {
    matrix.push_back(item.labels);
    if (std::all_of(item.labels.begin(), item.labels.end(),
                    [&](const auto& l) { return l == item.labels.front(); })) {
      ++unanimous;
    }
  }
  r.fleiss_kappa = FleissKappa(matrix);
  r.unanimous_pct =
      100.0 * static_cast<double>(unanimous) / static_cast<double>(r.n_items);
  for (std::size_t a = 0; a < set.n_annotators; ++a) {
    for (std::size_t b = a + 1; b < set.n_annotators; ++b) {
      std::vector<std::string> la, lb;
      for (const auto& item : set.items) {
        la.push_back(item.labels[a]);
        lb.push_back(item.labels[b]);
      }
      r.pairwise_cohen[std::to_string(a) + "-" + std::to_string(b)] =
          CohenKappa(la, lb);
    }
  }
  if (by_gender) {
    for (Gender g : {Gender::kFemale, Gender::kMale}) {
      std::vector<std::vector<std::string>> sub;
      for (const auto& item : set.items) {
        if (item.gender == g) sub.push_back(item.labels);
      }
      if (sub.size() >= 2) r.kappa_by_gender[std::string(ToString(g))] = FleissKappa(sub);
    }
  }
  r.majority_labels = MajorityVote(set);
  if (set.truth_map) {
    r.detection_rate_pct = DetectionRate(r.majority_labels, *set.truth_map);
  }
  return r;
}

Json ToJson(const AgreementReport& r) {
  Json j;
  j["n_items"] = r.n_items;
  j["fleiss_kappa"] = ToJson(r.fleiss_kappa);
  j["pairwise_cohen"] = Json::object();
  for (const auto& [k, v] : r.pairwise_cohen) j["pairwise_cohen"][k] = ToJson(v);
  j["kappa_by_gender"] = Json::object();
  for (const auto& [k, v] : r.kappa_by_gender) j["kappa_by_gender"][k] = ToJson(v);
  j["majority_labels"] = r.majority_labels;
  j["unanimous_pct"] = r.unanimous_pct;
  if (r.detection_rate_pct) {
    j["detection_rate_pct"] = *r.detection_rate_pct;
  } else {
    j["detection_rate_pct"] = nullptr;
  }
  return j;
}

}  // namespace biasaudit
