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

#include "iolkin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "iolkin/error.hpp"

namespace iolkin::stats {

std::string_view to_string(TTestMode mode) { return mode == TTestMode::kStandard ? "standard" : "literal"; }

TTestMode ttest_mode_from_string(std::string_view name) {
  if (name == "standard") return TTestMode::kStandard;
  if (name == "literal") return TTestMode::kLiteral;
  throw Error(ErrorCode::kInvalidArgument, "ttest_mode must be \"standard\" or \"literal\"");
}

namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sum of squared deviations from the mean.
double sum_sq_dev(std::span<const double> v, double mu) {
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s;
}

// Continued fraction for I_x(a, b), modified Lentz evaluation.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision for every dof we accept
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "pearson inputs differ in length");
  if (x.size() < 3) throw Error(ErrorCode::kTooFewSamples, "pearson needs at least three pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kZeroVariance, "pearson input is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_pvalue(double r, std::size_t m) {
  if (m < 3) throw Error(ErrorCode::kTooFewSamples, "pearson p-value needs m >= 3");
  if (!(std::abs(r) <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "correlation outside [-1,1]");
  if (std::abs(r) == 1.0) throw Error(ErrorCode::kDegenerateCorrelation, "|r| == 1, p-value is 0");
  if (r == 0.0) return 1.0;
  const double dof = static_cast<double>(m - 2);
  const double t = r * std::sqrt(dof / (1.0 - r * r));
  return std::min(1.0, 2.0 * student_t_sf(std::abs(t), dof));
}

TTestResult ttest(std::span<const double> x, std::span<const double> y, TTestMode mode) {
  if (x.size() < 2 || y.size() < 2) throw Error(ErrorCode::kTooFewSamples, "t-test needs at least two samples per group");
  TTestResult out;
  out.mode = mode;
  const double mx = mean(x);
  const double my = mean(y);
  const double sxx = sum_sq_dev(x, mx);
  const double syy = sum_sq_dev(y, my);
  const double diff = mx - my;
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());

  if (mode == TTestMode::kLiteral) {
    if (x.size() != y.size()) throw Error(ErrorCode::kLengthMismatch, "literal t statistic needs equal group sizes");
    const double denom = std::sqrt(sxx * syy / nx);
    out.dof = 2.0 * nx - 2.0;
    if (denom == 0.0) {
      if (diff == 0.0) throw Error(ErrorCode::kZeroVariance, "literal t statistic undefined: zero spread, equal means");
      out.statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
    } else {
      out.statistic = diff / denom;
    }
    return out;
  }

  out.dof = nx + ny - 2.0;
  const double pooled = (sxx + syy) / out.dof;
  const double se = std::sqrt(pooled * (1.0 / nx + 1.0 / ny));
  if (se == 0.0) {
    if (diff == 0.0) throw Error(ErrorCode::kZeroVariance, "both samples constant and equal");
    out.statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
    out.p_value = 0.0;
    return out;
  }
  out.statistic = diff / se;
  out.p_value = out.statistic == 0.0 ? 1.0 : std::min(1.0, 2.0 * student_t_sf(std::abs(out.statistic), out.dof));
  return out;
}

double regularized_incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

double student_t_sf(double t, double dof) {
  if (!(dof >= 1.0) || !std::isfinite(dof)) throw Error(ErrorCode::kInvalidDof, "degrees of freedom must be >= 1");
  if (std::isnan(t)) throw Error(ErrorCode::kInvalidArgument, "t is NaN");
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
  const double t2 = t * t;
  const double x = dof / (dof + t2);
  const double y = t2 / (dof + t2);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x, y);
  return t > 0.0 ? tail : 1.0 - tail;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::kTooFewSamples, "quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

BoxplotSummary boxplot_summary(std::span<const double> values) {
  if (values.size() < 4) throw Error(ErrorCode::kTooFewSamples, "boxplot needs at least four values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxplotSummary s;
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  s.iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * s.iqr;
  const double hi_fence = s.q3 + 1.5 * s.iqr;
  s.lower_whisker = s.q1;
  s.upper_whisker = s.q3;
  bool have_lo = false;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      s.outliers.push_back(x);
      continue;
    }
    if (!have_lo) {
      s.lower_whisker = x;
      have_lo = true;
    }
    s.upper_whisker = x;
  }
  return s;
}

namespace {

PairTable pair_table(const std::vector<BrandSample>& samples, std::vector<double> BrandSample::*field,
                     TTestMode mode) {
  PairTable t;
  const std::size_t n = samples.size();
  for (const auto& s : samples) t.brands.push_back(s.brand);
  t.cells.assign(n, std::vector<std::optional<TTestResult>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      TTestResult r;
      try {
        r = ttest(samples[i].*field, samples[j].*field, mode);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kZeroVariance) throw;
        r.mode = mode;  // identical constant groups: no evidence of a difference
        r.statistic = 0.0;
        r.dof = static_cast<double>((samples[i].*field).size() + (samples[j].*field).size()) - 2.0;
        if (mode == TTestMode::kStandard) r.p_value = 1.0;
      }
      t.cells[i][j] = r;
      TTestResult mirrored = r;
      mirrored.statistic = -r.statistic;
      t.cells[j][i] = mirrored;
    }
  return t;
}

}  // namespace

StudyResult run_study(std::vector<BrandSample> samples, TTestMode mode) {
  if (samples.size() < 2) throw Error(ErrorCode::kInsufficientBrands, "a study needs at least two brands");
  std::set<std::string> names;
  for (const auto& s : samples) {
    if (!names.insert(s.brand).second) throw Error(ErrorCode::kInvalidArgument, "duplicate brand \"" + s.brand + "\"");
    const std::size_t m = s.unfolding.size();
    if (s.instability.size() != m || s.rotation.size() != m)
      throw Error(ErrorCode::kLengthMismatch, "brand \"" + s.brand + "\" has vectors of different lengths");
    if (m < 3) throw Error(ErrorCode::kTooFewSamples, "brand \"" + s.brand + "\" has fewer than three videos");
  }
  std::sort(samples.begin(), samples.end(), [](const BrandSample& a, const BrandSample& b) { return a.brand < b.brand; });

  StudyResult out;
  out.ttest_mode = mode;
  for (const auto& s : samples) {
    BrandSummary b;
    b.brand = s.brand;
    b.m = s.unfolding.size();
    if (b.m >= 4) {
      b.unfolding = boxplot_summary(s.unfolding);
      b.instability = boxplot_summary(s.instability);
      b.rotation = boxplot_summary(s.rotation);
    }
    try {
      const double r = pearson(s.unfolding, s.rotation);
      b.unfolding_rotation.r = r;
      try {
        b.unfolding_rotation.p_value = pearson_pvalue(r, b.m);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateCorrelation) throw;
        b.unfolding_rotation.p_value = 0.0;
        b.unfolding_rotation.note = "perfect correlation";
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroVariance) throw;
      b.unfolding_rotation.note = "constant unfolding or rotation sample";
    }
    out.brands.push_back(std::move(b));
  }
  out.rotation = pair_table(samples, &BrandSample::rotation, mode);
  out.unfolding = pair_table(samples, &BrandSample::unfolding, mode);
  out.instability = pair_table(samples, &BrandSample::instability, mode);
  return out;
}

}  // namespace iolkin::stats
