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

#include <cmath>
#include <cstdint>

namespace iolkin {

using FrameIndex = std::int64_t;

/// Video frame rate assumed by every temporal quantity.
inline constexpr double kFramesPerSecond = 25.0;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;

  double norm() const { return std::hypot(x, y); }
};

/// Axis-aligned box, top-left origin, in pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  Point2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }
  double area() const { return w * h; }
  friend constexpr bool operator==(const BBox&, const BBox&) = default;
};

/// Angle of a vector in image coordinates (y down), degrees in [0, 360).
inline double angle_deg(Point2 v) {
  constexpr double kRadToDeg = 57.295779513082320876798;
  double deg = std::atan2(v.y, v.x) * kRadToDeg;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

}  // namespace iolkin
