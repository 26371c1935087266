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

#include <cstdint>
#include <vector>

#include "iolkin/ingest.hpp"
#include "iolkin/types.hpp"

namespace iolkin::geometry {

/// Integer pixel-centre coordinate.
struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

struct FrameGeometry {
  FrameIndex frame_index = 0;
  Point2 lens_center;
  Point2 pupil_center;
  double lens_area = 0.0;
  double pupil_area = 0.0;
  Point2 rel_pos;  // lens_center - pupil_center
};

/// Convex hull of lattice points, counter-clockwise in a y-up frame, no
/// collinear vertices. Degenerate inputs give one or two vertices.
std::vector<LatticePoint> convex_hull(std::vector<LatticePoint> points);

/// Filled convex hull of the foreground pixel centres. Every pixel whose
/// centre lies in the closed hull is foreground, so the result contains the
/// input and refining twice changes nothing. Throws EmptyMask.
MaskFrame convex_refine(const MaskFrame& mask);

/// Mean of the foreground pixel coordinates. Throws EmptyMask.
Point2 mask_centroid(const MaskFrame& mask);

/// Number of foreground pixels.
double mask_area(const MaskFrame& mask);

/// centroid(lens) - centroid(pupil). Throws EmptyMask or DimensionMismatch.
Point2 relative_position(const MaskFrame& lens, const MaskFrame& pupil);

/// Refines and measures every frame >= start_frame present in both
/// sequences. Frames where either mask is empty are skipped. Throws NoOverlap
/// when nothing remains.
std::vector<FrameGeometry> build_track(const MaskSequence& lens, const MaskSequence& pupil,
                                       FrameIndex start_frame);

}  // namespace iolkin::geometry
