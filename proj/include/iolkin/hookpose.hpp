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

// Lens pose from hook (haptic) detections.
//
// Detections at or below the confidence threshold are dropped. The remaining
// hook boxes are reduced to at most two hooks:
//
//   0 or 1 hook   kept as is
//   2 hooks       both kept when they sit roughly opposite each other around
//                 the lens centre, otherwise only the more confident one
//   3+ hooks      complete-linkage clustering into two groups, the most
//                 confident box of each group, then the two-hook rule
//
// Orientation is the angle of the hook-to-hook line, or of the
// centre-to-hook line when only one hook survives.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "iolkin/ingest.hpp"
#include "iolkin/types.hpp"

namespace iolkin::hookpose {

inline constexpr double kDefaultConfidenceThreshold = 0.6;
inline constexpr double kDefaultOppositionTolDeg = 30.0;

enum class Scenario { kZeroOrOne, kPair, kClustered };
enum class OrientationSource { kTwoHooks, kOneHook };

struct Hook {
  Point2 center;
  double confidence = 0.0;
  friend bool operator==(const Hook&, const Hook&) = default;
};

struct HookSelection {
  FrameIndex frame_index = 0;
  std::vector<Hook> kept_hooks;  // at most two, in input order
  Scenario scenario = Scenario::kZeroOrOne;
};

struct OrientationSample {
  FrameIndex frame_index = 0;
  double angle_deg = 0.0;  // [0, 360)
  OrientationSource source = OrientationSource::kTwoHooks;
};

/// Detections with confidence strictly above `threshold`, order preserved.
std::vector<DetectionRecord> filter_by_confidence(std::span<const DetectionRecord> dets,
                                                  double threshold = kDefaultConfidenceThreshold);

/// Unsigned angle in degrees [0, 180] between (a - center) and (b - center).
/// Throws DegenerateVector when either point coincides with the centre.
double angle_between(Point2 a, Point2 b, Point2 center);

/// True when the hooks subtend 180 +/- tol_deg degrees around the centre.
bool opposition_check(Point2 h1, Point2 h2, Point2 lens_center,
                      double tol_deg = kDefaultOppositionTolDeg);

/// Agglomerative complete-linkage (Euclidean) clustering down to two
/// clusters. On equal linkage distances the cluster pair with the
/// lexicographically smallest (lower id, higher id) is merged; a merged
/// cluster keeps the lower id. Returns point indices, each list ascending,
/// the cluster holding index 0 first. Throws TooFewPoints below three points.
std::array<std::vector<std::size_t>, 2> cluster_two(std::span<const Point2> points);

/// Reduces confidence-filtered hook detections of one frame to at most two
/// hooks. Ties in confidence go to the earlier detection.
HookSelection select_hooks(std::span<const DetectionRecord> hook_dets, Point2 lens_center,
                           double tol_deg = kDefaultOppositionTolDeg);

/// Lens orientation for a selection, or nullopt when no hook was kept.
/// Throws DegenerateVector for coincident points.
std::optional<OrientationSample> orientation(const HookSelection& selection, Point2 lens_center);

}  // namespace iolkin::hookpose
