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

#include "biasaudit/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

#include "biasaudit/stats.h"

namespace biasaudit {
namespace {

std::vector<std::string> ObservedLevels(std::span<const AnalysisRecord> records,
                                        const std::string& factor) {
  std::set<std::string> levels;
  for (const auto& r : records) {
    auto it = r.factors.find(factor);
    if (it == r.factors.end()) {
      throw Error(ErrorCode::kValidation,
                  "record '" + r.id + "' lacks factor '" + factor + "'");
    }
    levels.insert(it->second);
  }
  return {levels.begin(), levels.end()};
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void AppendCoefficientRows(std::string& out, const RegressionFit& fit,
                           const std::string& prefix) {
  for (const auto& c : fit.coefficients) {
    out += prefix + CsvField(c.term) + "," + FormatDouble(c.estimate) + "," +
           FormatDouble(c.std_error) + "," + FormatDouble(c.t_stat) + "," +
           FormatDouble(c.p_value) + "\n";
  }
}

}  // namespace

std::vector<AnalysisRecord> RecordsFromScored(std::span<const ScoredStory> stories,
                                              bool include_occupation) {
  std::vector<AnalysisRecord> out;
  out.reserve(stories.size());
  for (const auto& s : stories) {
    AnalysisRecord r;
    r.id = s.story_id;
    r.outcome = s.story_bias;
    r.factors["gender"] = ToString(s.condition.gender);
    r.factors["personality"] = s.condition.PersonalityLabel();
    r.factors["has_personality"] = s.condition.is_baseline() ? "without" : "with";
    r.factors["language"] = ToString(s.condition.language);
    r.factors["model"] = s.model;
    if (s.occ_type) r.factors["occ_type"] = ToString(*s.occ_type);
    if (include_occupation) r.factors["occupation"] = s.condition.occupation_slug;
    out.push_back(std::move(r));
  }
  return out;
}

RegressionSpec RegressionSpecFromJson(const Json& j) {
  RegressionSpec spec;
  try {
    spec.outcome = j.value("outcome", spec.outcome);
    if (j.contains("predictors")) {
      spec.predictors = j.at("predictors").get<std::vector<std::string>>();
    }
    if (j.contains("reference_levels")) {
      spec.reference_levels =
          j.at("reference_levels").get<std::map<std::string, std::string>>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("regression spec: ") + e.what());
  }
  if (spec.outcome != "story_bias") {
    throw Error(ErrorCode::kValidation,
                "unsupported outcome '" + spec.outcome + "' (only story_bias)");
  }
  std::set<std::string> seen;
  for (const auto& p : spec.predictors) {
    if (!seen.insert(p).second) {
      throw Error(ErrorCode::kValidation, "predictor '" + p + "' listed twice");
    }
  }
  return spec;
}

RegressionSpec LoadRegressionSpec(const std::filesystem::path& path) {
  try {
    return RegressionSpecFromJson(Json::parse(ReadFile(path)));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::string ReferenceLevel(const RegressionSpec& spec, const std::string& factor,
                           const std::vector<std::string>& observed) {
  if (observed.empty()) {
    throw Error(ErrorCode::kEmptyInput, "factor '" + factor + "' has no levels");
  }
  const auto present = [&](const std::string& level) {
    return std::find(observed.begin(), observed.end(), level) != observed.end();
  };
  if (auto it = spec.reference_levels.find(factor); it != spec.reference_levels.end()) {
    if (!present(it->second)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "reference level '" + it->second + "' for factor '" + factor +
                      "' does not occur in the data");
    }
    return it->second;
  }
  static const std::map<std::string, std::string> kDefaults = {
      {"gender", "neutral"}, {"personality", std::string(kBaselineLabel)},
      {"language", "en"}, {"has_personality", "without"}};
  if (auto it = kDefaults.find(factor); it != kDefaults.end() && present(it->second)) {
    return it->second;
  }
  return *std::min_element(observed.begin(), observed.end());
}

DesignMatrix BuildDesignMatrix(std::span<const AnalysisRecord> records,
                               const RegressionSpec& spec) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no records to model");
  struct FactorColumns {
    std::string factor;
    std::map<std::string, std::size_t> column_of;  // non-reference levels
  };
  DesignMatrix m;
  m.terms.push_back(kInterceptTerm);
  std::vector<FactorColumns> cols;
  for (const auto& factor : spec.predictors) {
    const auto levels = ObservedLevels(records, factor);
    const std::string ref = ReferenceLevel(spec, factor, levels);
    FactorColumns fc{factor, {}};
    for (const auto& level : levels) {
      if (level == ref) continue;
      fc.column_of[level] = m.terms.size();
      m.terms.push_back(factor + "[T." + level + "]");
    }
    cols.push_back(std::move(fc));
  }
  m.rows = records.size();
  m.cols = m.terms.size();
  m.data.assign(m.rows * m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    m.at(r, 0) = 1.0;
    for (const auto& fc : cols) {
      const std::string& level = records[r].factors.at(fc.factor);
      if (auto it = fc.column_of.find(level); it != fc.column_of.end()) {
        m.at(r, it->second) = 1.0;
      }
    }
  }
  return m;
}

std::vector<double> OutcomeVector(std::span<const AnalysisRecord> records) {
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(r.outcome);
  return y;
}

const Coefficient& RegressionFit::at(const std::string& term) const {
  for (const auto& c : coefficients) {
    if (c.term == term) return c;
  }
  throw Error(ErrorCode::kNotFound, "no coefficient named '" + term + "'");
}

RegressionFit FitOls(const DesignMatrix& design, std::span<const double> y) {
  const std::size_t n = design.rows;
  const std::size_t p = design.cols;
  if (y.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "design has " + std::to_string(n) + " rows but y has " +
                    std::to_string(y.size()));
  }
  if (p == 0 || n <= p) {
    throw Error(ErrorCode::kUnderdetermined,
                "need more observations than parameters: n=" + std::to_string(n) +
                    ", p=" + std::to_string(p));
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> xmap(design.data.data(),
                                        static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(p));
  const Eigen::MatrixXd x = xmap;
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd r_full = qr.matrixQR().topRows(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double col_norm = x.col(jj).norm();
    if (col_norm == 0.0 || std::fabs(r_full(jj, jj)) <= kRankTolerance * col_norm) {
      const std::string term = j < design.terms.size() ? design.terms[j] : std::to_string(j);
      throw Error(ErrorCode::kRankDeficient,
                  "design matrix is rank deficient: column '" + term +
                      "' is collinear with earlier columns");
    }
  }
  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd resid = yv - x * beta;
  const double rss = resid.squaredNorm();
  const double dof = static_cast<double>(n - p);

  const Eigen::MatrixXd r = r_full.triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));

  RegressionFit fit;
  fit.n = n;
  fit.residual_variance = rss / dof;
  fit.residuals.assign(resid.data(), resid.data() + n);
  const double ybar = yv.mean();
  const double tss = (yv.array() - ybar).square().sum();
  fit.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 1.0;
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    Coefficient c;
    c.term = j < design.terms.size() ? design.terms[j] : std::to_string(j);
    c.estimate = beta(jj);
    c.std_error = std::sqrt(fit.residual_variance * r_inv.row(jj).squaredNorm());
    if (c.std_error > 0.0) {
      c.t_stat = c.estimate / c.std_error;
      c.p_value = StudentTTwoSidedP(c.t_stat, dof);
    } else if (c.estimate == 0.0) {
      c.t_stat = 0.0;
      c.p_value = 1.0;
    } else {
      c.t_stat = std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p_value = 0.0;
    }
    fit.coefficients.push_back(std::move(c));
  }
  return fit;
}

RegressionFit FitModel(std::span<const AnalysisRecord> records,
                       const RegressionSpec& spec) {
  const DesignMatrix x = BuildDesignMatrix(records, spec);
  return FitOls(x, OutcomeVector(records));
}

std::map<std::string, RegressionFit> FitStratified(
    std::span<const AnalysisRecord> records, const RegressionSpec& spec,
    const std::string& factor) {
  RegressionSpec reduced = spec;
  std::erase(reduced.predictors, factor);
  std::map<std::string, RegressionFit> fits;
  for (const auto& level : ObservedLevels(records, factor)) {
    std::vector<AnalysisRecord> subset;
    for (const auto& r : records) {
      if (r.factors.at(factor) == level) subset.push_back(r);
    }
    const DesignMatrix x = BuildDesignMatrix(subset, reduced);
    if (x.rows <= x.cols) {
      throw Error(ErrorCode::kThinStratum,
                  "stratum " + factor + "=" + level + " has n=" +
                      std::to_string(x.rows) + " <= p=" + std::to_string(x.cols));
    }
    try {
      fits.emplace(level, FitOls(x, OutcomeVector(subset)));
    } catch (const Error& e) {
      throw Error(e.code(), "stratum " + factor + "=" + level + ": " + e.what());
    }
  }
  return fits;
}

std::vector<SummaryRow> Summarize(std::span<const AnalysisRecord> records,
                                  const std::vector<std::string>& group_by) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to summarize");
  std::map<std::vector<std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    std::vector<std::string> key;
    for (const auto& g : group_by) {
      auto it = r.factors.find(g);
      if (it == r.factors.end()) {
        throw Error(ErrorCode::kValidation,
                    "record '" + r.id + "' lacks grouping key '" + g + "'");
      }
      key.push_back(it->second);
    }
    groups[key].push_back(r.outcome);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, values] : groups) {
    SummaryRow row;
    for (std::size_t i = 0; i < group_by.size(); ++i) row.group[group_by[i]] = key[i];
    row.n = values.size();
    std::size_t male = 0;
    for (double v : values) {
      if (v > 0.0) ++male;
      if (v == 0.0) ++row.n_zero;
    }
    const double n = static_cast<double>(row.n);
    row.pct_male_leaning = 100.0 * static_cast<double>(male) / n;
    row.pct_female_leaning = 100.0 * static_cast<double>(row.n - male) / n;
    row.median = LowerMedian(values);
    row.std = PopulationStd(values);
    rows.push_back(std::move(row));
  }
  return rows;
}

Histogram ExportDistribution(std::span<const double> values, std::size_t bins) {
  if (bins < 2) throw Error(ErrorCode::kInvalidArgument, "histogram needs >= 2 bins");
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "histogram of no values");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram h;
  if (!(hi > lo)) {
    h.degenerate = true;
    h.rows.push_back({lo, hi, values.size(), 1.0});
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> edges(bins + 1);
  for (std::size_t b = 0; b < bins; ++b) edges[b] = lo + static_cast<double>(b) * width;
  edges[bins] = hi;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t b = static_cast<std::size_t>(it - edges.begin()) - 1;
    ++counts[std::min(b, bins - 1)];
  }
  const double n = static_cast<double>(values.size());
  for (std::size_t b = 0; b < bins; ++b) {
    h.rows.push_back({edges[b], edges[b + 1], counts[b],
                      static_cast<double>(counts[b]) / (n * width)});
  }
  return h;
}

std::string CoefficientsCsv(const RegressionFit& fit) {
  std::string out = "term,estimate,std_error,t,p\n";
  AppendCoefficientRows(out, fit, "");
  return out;
}

std::string StratifiedCoefficientsCsv(const std::string& factor,
                                      const std::map<std::string, RegressionFit>& fits) {
  std::string out = CsvField(factor) + ",term,estimate,std_error,t,p\n";
  for (const auto& [level, fit] : fits) AppendCoefficientRows(out, fit, CsvField(level) + ",");
  return out;
}

std::string SummaryCsv(const std::vector<SummaryRow>& rows,
                       const std::vector<std::string>& group_by) {
  std::string out;
  for (const auto& g : group_by) out += CsvField(g) + ",";
  out += "n,pct_male_leaning,pct_female_leaning,n_zero,median,std\n";
  for (const auto& r : rows) {
    for (const auto& g : group_by) out += CsvField(r.group.at(g)) + ",";
    out += std::to_string(r.n) + "," + FormatDouble(r.pct_male_leaning) + "," +
           FormatDouble(r.pct_female_leaning) + "," + std::to_string(r.n_zero) + "," +
           FormatDouble(r.median) + "," + FormatDouble(r.std) + "\n";
  }
  return out;
}

std::string HistogramCsv(const Histogram& h) {
  std::string out = "bin_left,bin_right,count,density\n";
  for (const auto& r : h.rows) {
    out += FormatDouble(r.bin_left) + "," + FormatDouble(r.bin_right) + "," +
           std::to_string(r.count) + "," + FormatDouble(r.density) + "\n";
  }
  return out;
}

Json ToJson(const RegressionFit& fit) {
  Json coefs = Json::array();
  for (const auto& c : fit.coefficients) {
    coefs.push_back({{"term", c.term}, {"estimate", c.estimate},
                     {"std_error", c.std_error}, {"t", c.t_stat}, {"p", c.p_value}});
  }
  return Json{{"n", fit.n}, {"r_squared", fit.r_squared},
              {"residual_variance", fit.residual_variance},
              {"coefficients", std::move(coefs)}};
}

}  // namespace biasaudit
