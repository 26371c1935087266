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
#include "iolkin/evalmetrics.hpp"

using namespace iolkin;
using namespace iolkin::evalmetrics;
using iolkin::testing::random_bitmap;

namespace {

DetectionRecord box(FrameIndex f, double x, double y, double w, double h, double conf,
                    DetClass c = DetClass::kHook) {
  return {f, c, {x, y, w, h}, conf};
}

MaskFrame bars(std::initializer_list<std::pair<int, int>> cells, int w, int h) {
  Bitmap b(w, h);
  for (auto [x, y] : cells) b.set(x, y);
  return encode(b, 0, MaskClass::kLens);
}

}  // namespace

TEST_CASE("mask overlap examples") {
  const MaskFrame a = bars({{0, 0}, {1, 0}}, 3, 1);
  const MaskFrame b = bars({{1, 0}, {2, 0}}, 3, 1);
  CHECK(mask_iou(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(mask_dice(a, b) == doctest::Approx(0.5));
  CHECK(mask_iou(a, a) == 1.0);
  CHECK(mask_dice(a, a) == 1.0);
  const MaskFrame c = bars({{2, 0}}, 3, 1);
  CHECK(mask_iou(a, c) == 0.0);
  CHECK(mask_dice(a, c) == 0.0);
  const MaskFrame e = bars({}, 3, 1);
  CHECK(mask_iou(e, e) == 1.0);
  CHECK(mask_dice(e, e) == 1.0);
  CHECK_ERROR(mask_iou(a, bars({}, 1, 3)), ErrorCode::kDimensionMismatch);
}

TEST_CASE("IoU never exceeds Dice and both are symmetric") {
  Rng rng(41);
  for (int i = 0; i < 300; ++i) {
    const int w = 1 + static_cast<int>(rng.index(20)), h = 1 + static_cast<int>(rng.index(20));
    const MaskFrame a = encode(random_bitmap(rng, w, h, rng.uniform()), 0, MaskClass::kLens);
    const MaskFrame b = encode(random_bitmap(rng, w, h, rng.uniform()), 0, MaskClass::kLens);
    CHECK(mask_iou(a, b) <= mask_dice(a, b) + 1e-15);
    CHECK(mask_iou(a, b) == mask_iou(b, a));
    CHECK(mask_dice(a, b) == mask_dice(b, a));
  }
}

TEST_CASE("box IoU") {
  const BBox u{0, 0, 1, 1};
  CHECK(box_iou(u, u) == 1.0);
  CHECK(box_iou(u, {5, 5, 1, 1}) == 0.0);
  CHECK(box_iou(u, {0.5, 0, 1, 1}) == doctest::Approx(1.0 / 3.0));
  CHECK(box_iou(u, {1, 0, 1, 1}) == 0.0);
}

TEST_CASE("average precision examples") {
  const std::vector<DetectionRecord> gt{box(0, 10, 10, 20, 20, 1)};
  CHECK(average_precision_at_iou(std::vector<DetectionRecord>{box(0, 10, 10, 20, 20, 0.9)}, gt) == 1.0);
  const std::vector<DetectionRecord> two{box(0, 10, 10, 20, 20, 0.9), box(0, 100, 100, 20, 20, 0.95)};
  CHECK(average_precision_at_iou(two, gt) == doctest::Approx(0.5));
  CHECK(average_precision_at_iou(std::vector<DetectionRecord>{}, gt) == 0.0);
  // Detections only match ground truth of the same frame.
  CHECK(average_precision_at_iou(std::vector<DetectionRecord>{box(1, 10, 10, 20, 20, 0.9)}, gt) == 0.0);
  // A second detection of the same object is a false positive.
  const std::vector<DetectionRecord> dup{box(0, 10, 10, 20, 20, 0.9), box(0, 11, 10, 20, 20, 0.8)};
  CHECK(average_precision_at_iou(dup, gt) == 1.0);
  CHECK_ERROR(average_precision_at_iou(two, std::vector<DetectionRecord>{}), ErrorCode::kNoGroundTruth);
}

TEST_CASE("AP integrates the precision envelope") {
  // Ranked hits: TP, FP, TP over 2 GTs: recall 0.5 at p=1, recall 1 at p=2/3.
  const std::vector<DetectionRecord> gt{box(0, 0, 0, 10, 10, 1), box(1, 0, 0, 10, 10, 1)};
  const std::vector<DetectionRecord> dets{box(0, 0, 0, 10, 10, 0.9), box(0, 50, 50, 10, 10, 0.8),
                                          box(1, 0, 0, 10, 10, 0.7)};
  CHECK(average_precision_at_iou(dets, gt) == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)));
}

TEST_CASE("AP is invariant to monotone confidence rescaling") {
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    std::vector<DetectionRecord> gt, dets, scaled;
    for (FrameIndex f = 0; f < 5; ++f) {
      gt.push_back(box(f, rng.uniform(0, 50), rng.uniform(0, 50), 20, 20, 1));
      for (int k = 0; k < 3; ++k) {
        const double c = rng.uniform();
        const BBox g = gt.back().bbox;
        dets.push_back(box(f, g.x + rng.uniform(-15, 15), g.y + rng.uniform(-15, 15), 20, 20, c));
        scaled.push_back(dets.back());
        scaled.back().confidence = c * c * 0.5;
      }
    }
    CHECK(average_precision_at_iou(dets, gt) == average_precision_at_iou(scaled, gt));
  }
}

TEST_CASE("mAP averages the classes present in ground truth") {
  const std::vector<DetectionRecord> gt{box(0, 0, 0, 10, 10, 1, DetClass::kLens), box(0, 40, 40, 10, 10, 1)};
  const std::vector<DetectionRecord> dets{box(0, 0, 0, 10, 10, 0.9, DetClass::kLens),
                                          box(0, 90, 90, 10, 10, 0.9)};
  const auto per = ap_per_class(dets, gt);
  CHECK(per.at(DetClass::kLens) == 1.0);
  CHECK(per.at(DetClass::kHook) == 0.0);
  CHECK(map_at_iou(dets, gt) == 0.5);
  const std::vector<DetectionRecord> lens_only{box(0, 0, 0, 10, 10, 1, DetClass::kLens)};
  CHECK(ap_per_class(dets, lens_only).size() == 1);
  CHECK(map_at_iou(dets, lens_only) == 1.0);
}

TEST_CASE("orientation error summary") {
  const std::vector<double> same{10, 20, 30};
  const auto z = orientation_error_summary(same, same);
  CHECK(z.mean == 0.0);
  CHECK(z.std == 0.0);
  CHECK(z.topk_means.at(25) == 0.0);
  const std::vector<double> pred{0, 1, 2, 3}, truth{0, 0, 0, 0};
  const auto s = orientation_error_summary(pred, truth);
  CHECK(s.mean == 1.5);
  CHECK(s.topk_means.at(50) == 0.5);
  CHECK(s.topk_means.at(75) == 1.0);
  CHECK(s.topk_means.at(25) == 0.0);
  CHECK(s.std == doctest::Approx(std::sqrt(1.25)));
  // Errors are measured with period 180.
  CHECK(orientation_error_summary(std::vector<double>{179}, std::vector<double>{1}).mean == doctest::Approx(2.0));
  CHECK_ERROR(orientation_error_summary(pred, same), ErrorCode::kLengthMismatch);
  CHECK_ERROR(orientation_error_summary(std::vector<double>{}, std::vector<double>{}), ErrorCode::kTooFewSamples);
}

TEST_CASE("top-k means shrink with k and stay below the mean") {
  Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> p(1 + rng.index(50)), t(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = rng.uniform(0, 360);
      t[k] = rng.uniform(0, 360);
    }
    const auto s = orientation_error_summary(p, t);
    CHECK(s.topk_means.at(25) <= s.topk_means.at(50) + 1e-12);
    CHECK(s.topk_means.at(50) <= s.topk_means.at(75) + 1e-12);
    CHECK(s.topk_means.at(75) <= s.mean + 1e-12);
  }
}
