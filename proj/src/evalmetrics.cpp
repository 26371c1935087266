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

#include "iolkin/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iolkin/error.hpp"
#include "iolkin/kinematics.hpp"

namespace iolkin::evalmetrics {

namespace {

struct Overlap {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t both = 0;
};

Overlap overlap(const MaskFrame& a, const MaskFrame& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(ErrorCode::kDimensionMismatch, "masks differ in size");
  const Bitmap ba = decode(a);
  const Bitmap bb = decode(b);
  Overlap o;
  for (std::size_t i = 0; i < ba.cells.size(); ++i) {
    o.a += ba.cells[i];
    o.b += bb.cells[i];
    o.both += ba.cells[i] & bb.cells[i];
  }
  return o;
}

}  // namespace

double mask_iou(const MaskFrame& a, const MaskFrame& b) {
  const Overlap o = overlap(a, b);
  const std::uint64_t uni = o.a + o.b - o.both;
  return uni == 0 ? 1.0 : static_cast<double>(o.both) / static_cast<double>(uni);
}

double mask_dice(const MaskFrame& a, const MaskFrame& b) {
  const Overlap o = overlap(a, b);
  const std::uint64_t sum = o.a + o.b;
  return sum == 0 ? 1.0 : 2.0 * static_cast<double>(o.both) / static_cast<double>(sum);
}

double box_iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni <= 0.0 ? 0.0 : inter / uni;
}

double average_precision_at_iou(std::span<const DetectionRecord> dets, std::span<const DetectionRecord> gts,
                                double iou_thresh) {
  if (gts.empty()) throw Error(ErrorCode::kNoGroundTruth, "average precision needs ground truth");

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return dets[i].confidence > dets[j].confidence; });

  std::vector<bool> gt_used(gts.size(), false);
  std::vector<double> precision;
  std::vector<double> recall;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k : order) {
    const DetectionRecord& d = dets[k];
    double best_iou = -1.0;
    std::size_t best = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_used[g] || gts[g].frame_index != d.frame_index) continue;
      const double iou = box_iou(d.bbox, gts[g].bbox);
      if (iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    if (best < gts.size() && best_iou >= iou_thresh) {
      gt_used[best] = true;
      ++tp;
    } else {
      ++fp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }

  // All-points interpolation: precision envelope, integrated over recall steps.
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

std::map<DetClass, double> ap_per_class(std::span<const DetectionRecord> dets, std::span<const DetectionRecord> gts,
                                        double iou_thresh) {
  std::map<DetClass, double> out;
  for (DetClass cls : {DetClass::kLens, DetClass::kHook}) {
    std::vector<DetectionRecord> d;
    std::vector<DetectionRecord> g;
    for (const auto& x : dets)
      if (x.class_label == cls) d.push_back(x);
    for (const auto& x : gts)
      if (x.class_label == cls) g.push_back(x);
    if (!g.empty()) out[cls] = average_precision_at_iou(d, g, iou_thresh);
  }
  return out;
}

double map_at_iou(std::span<const DetectionRecord> dets, std::span<const DetectionRecord> gts, double iou_thresh) {
  const auto per_class = ap_per_class(dets, gts, iou_thresh);
  if (per_class.empty()) throw Error(ErrorCode::kNoGroundTruth, "mAP needs ground truth");
  double sum = 0.0;
  for (const auto& [cls, ap] : per_class) sum += ap;
  return sum / static_cast<double>(per_class.size());
}

OrientationErrorSummary orientation_error_summary(std::span<const double> pred_angles,
                                                  std::span<const double> true_angles) {
  if (pred_angles.size() != true_angles.size())
    throw Error(ErrorCode::kLengthMismatch, "predicted and true angles differ in length");
  if (pred_angles.empty()) throw Error(ErrorCode::kTooFewSamples, "no orientation samples");
  std::vector<double> err;
  err.reserve(pred_angles.size());
  for (std::size_t i = 0; i < pred_angles.size(); ++i)
    err.push_back(kinematics::angular_diff(pred_angles[i], true_angles[i]));
  std::sort(err.begin(), err.end());

  const auto n = err.size();
  OrientationErrorSummary s;
  s.mean = std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double e : err) ss += (e - s.mean) * (e - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(n));
  for (int k : {75, 50, 25}) {
    const std::size_t count = std::max<std::size_t>(1, (static_cast<std::size_t>(k) * n + 99) / 100);
    s.topk_means[k] =
        std::accumulate(err.begin(), err.begin() + static_cast<std::ptrdiff_t>(count), 0.0) / static_cast<double>(count);
  }
  return s;
}

}  // namespace iolkin::evalmetrics
