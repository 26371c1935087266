// Copyright 2026 The iolkin Authors
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

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iolkin::stats {

/// kStandard is the pooled-variance two-sample Student t. kLiteral
/// evaluates (mean_x - mean_y) / sqrt(Sxx * Syy / m), with Sxx and Syy the
/// sums of squared deviations; it has no reference distribution, so no
/// p-value is attached.
enum class TTestMode { kStandard, kLiteral };

std::string_view to_string(TTestMode mode);
TTestMode ttest_mode_from_string(std::string_view name);

struct TTestResult {
  double statistic = 0.0;
  double dof = 0.0;
  std::optional<double> p_value;  // two-sided; absent in literal mode
  TTestMode mode = TTestMode::kStandard;
};

struct BoxplotSummary {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_whisker = 0.0;
  double upper_whisker = 0.0;
  std::vector<double> outliers;  // ascending
};

struct BrandSample {
  std::string brand;
  std::vector<double> unfolding;    // seconds
  std::vector<double> instability;  // pixels
  std::vector<double> rotation;     // degrees
};

struct PearsonResult {
  std::optional<double> r;
  std::optional<double> p_value;
  std::string note;  // why r or p is missing or degenerate
};

struct BrandSummary {
  std::string brand;
  std::size_t m = 0;
  // Boxplots need at least four videos.
  std::optional<BoxplotSummary> unfolding;
  std::optional<BoxplotSummary> instability;
  std::optional<BoxplotSummary> rotation;
  PearsonResult unfolding_rotation;
};

/// Symmetric brand-by-brand table; the diagonal is empty (not applicable).
/// cells[i][j] is the test of brand i against brand j.
struct PairTable {
  std::vector<std::string> brands;
  std::vector<std::vector<std::optional<TTestResult>>> cells;
};

struct StudyResult {
  std::vector<BrandSummary> brands;  // sorted by brand name
  PairTable rotation;
  PairTable unfolding;
  PairTable instability;
  TTestMode ttest_mode = TTestMode::kStandard;
  std::string quantile_method = "linear interpolation of order statistics (type 7)";
};

/// Sample Pearson correlation. Throws LengthMismatch, TooFewSamples (< 3) or
/// ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of r under H0: rho = 0, via t = r sqrt((m-2)/(1-r^2))
/// with m-2 degrees of freedom. Throws DegenerateCorrelation for |r| == 1.
double pearson_pvalue(double r, std::size_t m);

/// Two-sample t-test. Standard mode pools the variances (x and y may differ
/// in length, m >= 2 each); literal mode requires equal lengths.
TTestResult ttest(std::span<const double> x, std::span<const double> y, TTestMode mode = TTestMode::kStandard);

/// Regularized incomplete beta I_x(a, b); y must equal 1 - x and is passed
/// separately so callers keep precision near x = 1.
double regularized_incomplete_beta(double a, double b, double x, double y);

/// Upper tail P(T > t) of Student's t with `dof` degrees of freedom.
double student_t_sf(double t, double dof);

/// Type-7 quantile of already sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Quartiles, IQR, 1.5 IQR whiskers and outliers. Throws TooFewSamples (< 4).
BoxplotSummary boxplot_summary(std::span<const double> values);

/// Per-brand summaries and every pairwise t-test. Throws InsufficientBrands
/// for fewer than two brands.
StudyResult run_study(std::vector<BrandSample> samples, TTestMode mode = TTestMode::kStandard);

}  // namespace iolkin::stats
