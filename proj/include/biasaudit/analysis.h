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

#ifndef BIASAUDIT_ANALYSIS_H_
#define BIASAUDIT_ANALYSIS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/scoring.h"
#include "biasaudit/util.h"

namespace biasaudit {

// One observation: categorical factor levels keyed by factor name.
struct AnalysisRecord {
  std::string id;
  std::map<std::string, std::string> factors;
  double outcome = 0.0;
};

// Factors: gender, personality, language, model, occ_type (when known),
// has_personality ("with"/"without") and, when requested, occupation.
std::vector<AnalysisRecord> RecordsFromScored(std::span<const ScoredStory> stories,
                                              bool include_occupation = false);

struct RegressionSpec {
  std::string outcome = "story_bias";
  std::vector<std::string> predictors = {"gender", "personality", "language",
                                         "occ_type", "model"};
  std::map<std::string, std::string> reference_levels;
};

RegressionSpec RegressionSpecFromJson(const Json& j);
RegressionSpec LoadRegressionSpec(const std::filesystem::path& path);

// Reference level for `factor` given the observed levels: the configured
// one, else gender=neutral, personality=BASELINE, language=en, and the
// lexicographically first level for anything else.
std::string ReferenceLevel(const RegressionSpec& spec, const std::string& factor,
                           const std::vector<std::string>& observed_levels);

// Row-major dense design matrix.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<std::string> terms;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

inline constexpr const char* kInterceptTerm = "(Intercept)";

// Intercept, then per factor (spec order) one indicator per non-reference
// level in lexicographic order, named "factor[T.level]". Throws
// kEmptyInput, kValidation for a missing factor (names the record), or
// kInvalidArgument for a reference level absent from the data.
DesignMatrix BuildDesignMatrix(std::span<const AnalysisRecord> records,
                               const RegressionSpec& spec);
std::vector<double> OutcomeVector(std::span<const AnalysisRecord> records);

struct Coefficient {
  std::string term;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 0.0;
};

struct RegressionFit {
  std::vector<Coefficient> coefficients;  // design-matrix column order
  std::size_t n = 0;
  double r_squared = 0.0;
  double residual_variance = 0.0;
  std::vector<double> residuals;

  const Coefficient& at(const std::string& term) const;
};

// Relative threshold on |R_jj| / ||X_j|| below which column j is treated as
// a linear combination of earlier columns.
inline constexpr double kRankTolerance = 1e-10;

// Least squares via Householder QR. Throws kUnderdetermined when n <= p and
// kRankDeficient naming the first collinear column.
RegressionFit FitOls(const DesignMatrix& x, std::span<const double> y);
RegressionFit FitModel(std::span<const AnalysisRecord> records,
                       const RegressionSpec& spec);

// One fit per level (lexicographic) of `factor`, which is removed from the
// predictors. Throws kThinStratum naming the level when n <= p.
std::map<std::string, RegressionFit> FitStratified(
    std::span<const AnalysisRecord> records, const RegressionSpec& spec,
    const std::string& factor);

struct SummaryRow {
  std::map<std::string, std::string> group;
  double pct_male_leaning = 0.0;
  double pct_female_leaning = 0.0;
  std::size_t n_zero = 0;  // counted as female-leaning
  double median = 0.0;
  double std = 0.0;        // population
  std::size_t n = 0;
};

// Groups in lexicographic order of their key tuple.
std::vector<SummaryRow> Summarize(std::span<const AnalysisRecord> records,
                                  const std::vector<std::string>& group_by);

struct HistogramRow {
  double bin_left = 0.0;
  double bin_right = 0.0;
  std::size_t count = 0;
  double density = 0.0;
};

struct Histogram {
  std::vector<HistogramRow> rows;
  bool degenerate = false;  // all values equal: one zero-width bin, density 1
};

// Equal-width bins over [min, max]; bins are half-open except the last.
Histogram ExportDistribution(std::span<const double> values, std::size_t bins);

std::string CoefficientsCsv(const RegressionFit& fit);
std::string StratifiedCoefficientsCsv(const std::string& factor,
                                      const std::map<std::string, RegressionFit>& fits);
std::string SummaryCsv(const std::vector<SummaryRow>& rows,
                       const std::vector<std::string>& group_by);
std::string HistogramCsv(const Histogram& h);
Json ToJson(const RegressionFit& fit);

}  // namespace biasaudit

#endif  // BIASAUDIT_ANALYSIS_H_
