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


#include <doctest.h>

#include "helpers.hpp"
#include "iolkin/kinematics.hpp"

using namespace iolkin;
using namespace iolkin::kinematics;
using hookpose::OrientationSample;

namespace {

std::vector<OrientationSample> samples(const std::vector<std::pair<FrameIndex, double>>& v) {
  std::vector<OrientationSample> out;
  for (auto [f, a] : v) out.push_back({f, a, hookpose::OrientationSource::kTwoHooks});
  return out;
}

geometry::FrameGeometry geo(FrameIndex f, double area, Point2 rel) {
  geometry::FrameGeometry g;
  g.frame_index = f;
  g.lens_area = area;
  g.rel_pos = rel;
  g.lens_center = rel;
  return g;
}

}  // namespace

TEST_CASE("smoothing examples") {
  const std::vector<double> ones(20, 1.0);
  CHECK(smooth_area(ones) == ones);
  std::vector<double> spike(15, 1.0);
  spike[7] = 16.0;
  const auto s = smooth_area(spike);
  CHECK(s[7] == doctest::Approx(2.0));
  for (int i = 0; i < 15; ++i)
    if (i != 7) CHECK(s[i] == spike[i]);
  const std::vector<double> shorter{1, 9, 3};
  CHECK(smooth_area(shorter) == shorter);
  CHECK_ERROR(smooth_area(shorter, 4), ErrorCode::kInvalidArgument);
}

TEST_CASE("interior smoothing equals a brute-force windowed mean") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.index(80);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(0, 1000);
    const auto s = smooth_area(v);
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= 7 && i + 7 < n) {
        double sum = 0;
        for (std::size_t j = i - 7; j <= i + 7; ++j) sum += v[j];
        CHECK(s[i] == doctest::Approx(sum / 15).epsilon(1e-12));
      } else {
        CHECK(s[i] == v[i]);
      }
    }
  }
}

TEST_CASE("unfolding time is the first argmax and affine invariant") {
  const std::vector<double> flat{5, 5, 5};
  CHECK(unfolding_time(flat) == 0);
  const std::vector<double> bump{1, 2, 3, 3, 2};
  CHECK(unfolding_time(bump) == 2);
  CHECK_ERROR(unfolding_time(std::vector<double>{}), ErrorCode::kEmptySeries);
  Rng rng(22);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(30);
    for (double& x : v) x = std::floor(rng.uniform(0, 10));
    std::vector<double> w(v);
    for (double& x : w) x = 4.0 * x + 7.0;
    CHECK(unfolding_time(v) == unfolding_time(w));
  }
}

TEST_CASE("instability in both modes") {
  const std::vector<Point2> still(5, Point2{3, 1});
  CHECK(instability(still, InstabilityMode::kLiteral) == 0.0);
  CHECK(instability(still, InstabilityMode::kDisplacement) == 0.0);
  const std::vector<Point2> step{{0, 0}, {3, 4}};
  CHECK(instability(step, InstabilityMode::kLiteral) == 5.0);
  CHECK(instability(step, InstabilityMode::kDisplacement) == 5.0);
  const std::vector<Point2> arc{{5, 0}, {0, 5}};
  CHECK(instability(arc, InstabilityMode::kLiteral) == 0.0);
  CHECK(instability(arc, InstabilityMode::kDisplacement) == doctest::Approx(7.0710678118654755));
  CHECK_ERROR(instability(std::vector<Point2>{{1, 1}}), ErrorCode::kTooFewSamples);
}

TEST_CASE("instability and rotation are additive over segments") {
  Rng rng(23);
  std::vector<Point2> r(40);
  for (Point2& p : r) p = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
  for (auto mode : {InstabilityMode::kLiteral, InstabilityMode::kDisplacement}) {
    const double whole = instability(r, mode);
    const double parts = instability(std::span(r).first(20), mode) + instability(std::span(r).subspan(19), mode);
    CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
    CHECK(whole >= 0.0);
  }
  std::vector<OrientationSample> o;
  for (FrameIndex f = 0; f < 40; ++f) o.push_back({f, rng.uniform(0, 360), hookpose::OrientationSource::kTwoHooks});
  const double whole = rotation(o, 0);
  const double parts = rotation(std::span(o).first(20), 0) + rotation(std::span(o).subspan(19), 0);
  CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("angular difference has period 180") {
  CHECK(angular_diff(10, 10) == 0.0);
  CHECK(angular_diff(10, 350) == doctest::Approx(20.0));
  CHECK(angular_diff(0, 90) == 90.0);
  CHECK(angular_diff(175, 5) == doctest::Approx(10.0));
  CHECK(angular_diff(0, 180) == 0.0);
  Rng rng(24);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform(0, 360), b = rng.uniform(0, 360);
    const double d = angular_diff(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 90.0);
    CHECK(d == doctest::Approx(angular_diff(b, a)));
  }
}

TEST_CASE("rotation examples") {
  CHECK(rotation(samples({{0, 30}, {1, 30}, {2, 30}}), 0) == 0.0);
  CHECK(rotation(samples({{0, 0}, {1, 10}, {2, 20}}), 0) == doctest::Approx(20.0));
  CHECK(rotation(samples({{0, 175}, {1, 5}}), 0) == doctest::Approx(10.0));
  // Gaps bridge to the next sample; samples before the start are ignored.
  CHECK(rotation(samples({{0, 90}, {5, 10}, {9, 15}}), 3) == doctest::Approx(5.0));
  CHECK(rotation(samples({{4, 12}}), 0) == 0.0);
  CHECK_ERROR(rotation(samples({{0, 10}, {1, 20}}), 2), ErrorCode::kNoOrientationAfterUnfold);
  CHECK_ERROR(rotation(samples({{1, 10}, {1, 20}}), 0), ErrorCode::kInvariantViolation);
}

TEST_CASE("rotation is invariant to a constant offset") {
  Rng rng(25);
  std::vector<OrientationSample> o, shifted;
  for (FrameIndex f = 0; f < 60; ++f) {
    const double a = rng.uniform(0, 360);
    o.push_back({f, a, hookpose::OrientationSource::kTwoHooks});
    shifted.push_back({f, std::fmod(a + 123.4, 360.0), hookpose::OrientationSource::kTwoHooks});
  }
  CHECK(rotation(o, 0) == doctest::Approx(rotation(shifted, 0)).epsilon(1e-9));
}

TEST_CASE("report for a stationary unfolded lens") {
  std::vector<geometry::FrameGeometry> track;
  std::vector<OrientationSample> o;
  for (FrameIndex f = 300; f < 400; ++f) {
    track.push_back(geo(f, 1000, {2, 3}));
    o.push_back({f, 40, hookpose::OrientationSource::kTwoHooks});
  }
  const VideoReport r = compute_report(track, o, 300);
  CHECK(r.t_u_frames == 0);
  CHECK(r.t_u_seconds == 0.0);
  CHECK(r.instability_px == 0.0);
  CHECK(r.rotation_deg == 0.0);
  CHECK(r.n_frames == 100);
  CHECK(r.coverage == 1.0);
  CHECK_FALSE(r.low_coverage);
  CHECK(r.instability_mode == InstabilityMode::kLiteral);
}

TEST_CASE("report timing, coverage and errors") {
  std::vector<geometry::FrameGeometry> track;
  std::vector<OrientationSample> o;
  for (FrameIndex k = 0; k < 100; ++k) {
    track.push_back(geo(75 + k, k < 40 ? 100.0 + 10.0 * static_cast<double>(k) : 500.0, {0, 0}));
    if (k % 5 == 0) o.push_back({75 + k, static_cast<double>(k), hookpose::OrientationSource::kOneHook});
  }
  const VideoReport r = compute_report(track, o, 75);
  // Raw plateau starts at sample 40; the smoothed one 7 samples later.
  CHECK(r.t_u_frames == 47);
  CHECK(r.t_u_seconds == doctest::Approx(47.0 / 25.0));
  CHECK(r.rotation_deg == doctest::Approx(95.0 - 50.0));
  CHECK(r.n_orientation_samples == 10);
  CHECK(r.coverage == doctest::Approx(10.0 / 53.0));
  CHECK(r.low_coverage);

  const std::vector<geometry::FrameGeometry> single{geo(0, 10, {0, 0})};
  CHECK_ERROR(compute_report(single, samples({{0, 1}}), 0), ErrorCode::kTooFewSamples);
  CHECK_ERROR(compute_report({}, samples({{0, 1}}), 0), ErrorCode::kEmptySeries);
  CHECK(instability_mode_from_string("displacement") == InstabilityMode::kDisplacement);
  CHECK_ERROR(instability_mode_from_string("sum"), ErrorCode::kInvalidArgument);
}
