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

// Backend validation metrics: mask overlap, box average precision and lens
// orientation error.

#pragma once

#include <map>
#include <span>
#include <vector>

#include "iolkin/ingest.hpp"

namespace iolkin::evalmetrics {

struct OrientationErrorSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::map<int, double> topk_means;  // k percent -> mean of the k% smallest errors
};

/// |A n B| / |A u B|; 1 when both masks are empty. Throws DimensionMismatch.
double mask_iou(const MaskFrame& a, const MaskFrame& b);
/// 2|A n B| / (|A| + |B|); 1 when both masks are empty.
double mask_dice(const MaskFrame& a, const MaskFrame& b);

double box_iou(const BBox& a, const BBox& b);

/// Single-class AP. Detections are matched greedily in descending
/// confidence (stable on ties) to the best-overlapping unmatched ground
/// truth of the same frame; the precision-recall curve is integrated with
/// all-points interpolation. Throws NoGroundTruth.
double average_precision_at_iou(std::span<const DetectionRecord> dets, std::span<const DetectionRecord> gts,
                                double iou_thresh = 0.5);

/// Mean AP over the classes present in the ground truth.
double map_at_iou(std::span<const DetectionRecord> dets, std::span<const DetectionRecord> gts,
                  double iou_thresh = 0.5);

/// Per-class AP for the classes present in the ground truth.
std::map<DetClass, double> ap_per_class(std::span<const DetectionRecord> dets, std::span<const DetectionRecord> gts,
                                        double iou_thresh = 0.5);

/// Axis-angle errors (period 180 deg) summarised as mean, std and the mean of
/// the best 75%, 50% and 25% of samples. Throws LengthMismatch or
/// TooFewSamples on empty input.
OrientationErrorSummary orientation_error_summary(std::span<const double> pred_angles,
                                                  std::span<const double> true_angles);

}  // namespace iolkin::evalmetrics
