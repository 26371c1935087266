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

#include "iolkin/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "iolkin/error.hpp"

namespace iolkin::geometry {

namespace {

std::int64_t cross(const LatticePoint& o, const LatticePoint& a, const LatticePoint& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t num, std::int64_t den) { return -floor_div(-num, den); }

// Leftmost and rightmost foreground pixel of every occupied row; the hull of
// these equals the hull of all foreground pixels.
std::vector<LatticePoint> row_extremes(const std::vector<RowSpan>& spans) {
  std::vector<LatticePoint> pts;
  std::size_t i = 0;
  while (i < spans.size()) {
    const int y = spans[i].y;
    int lo = spans[i].x_begin;
    int hi = spans[i].x_end - 1;
    while (i < spans.size() && spans[i].y == y) {
      lo = std::min(lo, spans[i].x_begin);
      hi = std::max(hi, spans[i].x_end - 1);
      ++i;
    }
    pts.push_back({lo, y});
    if (hi != lo) pts.push_back({hi, y});
  }
  return pts;
}

// Lattice x-range [lo, hi] of the closed hull on row y; empty when lo > hi.
std::pair<std::int64_t, std::int64_t> hull_row_range(const std::vector<LatticePoint>& hull, std::int64_t y) {
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  const std::size_t n = hull.size();
  if (n == 1) {
    if (hull[0].y == y) return {hull[0].x, hull[0].x};
    return {lo, hi};
  }
  for (std::size_t i = 0; i < n; ++i) {
    const LatticePoint& a = hull[i];
    const LatticePoint& b = hull[(i + 1) % n];
    if (y < std::min(a.y, b.y) || y > std::max(a.y, b.y)) continue;
    if (a.y == b.y) {
      lo = std::min({lo, a.x, b.x});
      hi = std::max({hi, a.x, b.x});
      continue;
    }
    std::int64_t den = b.y - a.y;
    std::int64_t num = a.x * den + (y - a.y) * (b.x - a.x);
    if (den < 0) {
      den = -den;
      num = -num;
    }
    lo = std::min(lo, ceil_div(num, den));
    hi = std::max(hi, floor_div(num, den));
  }
  return {lo, hi};
}

struct Moments {
  std::uint64_t count = 0;
  std::int64_t sum_x = 0;
  std::int64_t sum_y = 0;
};

Moments moments(const std::vector<RowSpan>& spans) {
  Moments m;
  for (const RowSpan& s : spans) {
    const std::int64_t len = s.x_end - s.x_begin;
    m.count += static_cast<std::uint64_t>(len);
    m.sum_x += (static_cast<std::int64_t>(s.x_begin) + s.x_end - 1) * len / 2;
    m.sum_y += static_cast<std::int64_t>(s.y) * len;
  }
  return m;
}

std::vector<RowSpan> refined_spans(const MaskFrame& mask) {
  validate(mask);
  const std::vector<RowSpan> spans = rle_to_spans(mask.rle, mask.width);
  if (spans.empty()) throw Error(ErrorCode::kEmptyMask, "mask of frame " + std::to_string(mask.frame_index) + " is empty");
  const std::vector<LatticePoint> hull = convex_hull(row_extremes(spans));

  std::int64_t y_min = hull.front().y;
  std::int64_t y_max = hull.front().y;
  for (const LatticePoint& p : hull) {
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  std::vector<RowSpan> out;
  out.reserve(static_cast<std::size_t>(y_max - y_min + 1));
  for (std::int64_t y = y_min; y <= y_max; ++y) {
    auto [lo, hi] = hull_row_range(hull, y);
    if (lo > hi) continue;
    out.push_back({static_cast<int>(y), static_cast<int>(lo), static_cast<int>(hi + 1)});
  }
  return out;
}

Point2 centroid_of(const Moments& m) {
  const auto n = static_cast<double>(m.count);
  return {static_cast<double>(m.sum_x) / n, static_cast<double>(m.sum_y) / n};
}

}  // namespace

std::vector<LatticePoint> convex_hull(std::vector<LatticePoint> points) {
  std::sort(points.begin(), points.end(),
            [](const LatticePoint& a, const LatticePoint& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 2) return points;

  std::vector<LatticePoint> hull(2 * points.size());
  std::size_t k = 0;
  for (const LatticePoint& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = points.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

MaskFrame convex_refine(const MaskFrame& mask) {
  const std::vector<RowSpan> spans = refined_spans(mask);
  return MaskFrame{mask.frame_index, mask.class_label, mask.width, mask.height,
                   spans_to_rle(spans, mask.width, mask.height)};
}

Point2 mask_centroid(const MaskFrame& mask) {
  validate(mask);
  const Moments m = moments(rle_to_spans(mask.rle, mask.width));
  if (m.count == 0) throw Error(ErrorCode::kEmptyMask, "mask of frame " + std::to_string(mask.frame_index) + " is empty");
  return centroid_of(m);
}

double mask_area(const MaskFrame& mask) {
  validate(mask);
  return static_cast<double>(foreground_count(mask.rle));
}

Point2 relative_position(const MaskFrame& lens, const MaskFrame& pupil) {
  if (lens.width != pupil.width || lens.height != pupil.height)
    throw Error(ErrorCode::kDimensionMismatch, "lens and pupil masks differ in size");
  return mask_centroid(lens) - mask_centroid(pupil);
}

std::vector<FrameGeometry> build_track(const MaskSequence& lens, const MaskSequence& pupil,
                                       FrameIndex start_frame) {
  std::vector<FrameGeometry> track;
  bool any_common = false;
  for (const MaskFrame& lm : lens.frames) {
    if (lm.frame_index < start_frame) continue;
    const MaskFrame* pm = pupil.find(lm.frame_index);
    if (pm == nullptr) continue;
    any_common = true;
    if (lm.width != pm->width || lm.height != pm->height)
      throw Error(ErrorCode::kDimensionMismatch,
                  "lens and pupil masks differ in size at frame " + std::to_string(lm.frame_index));
    validate(lm);
    validate(*pm);
    if (foreground_count(lm.rle) == 0 || foreground_count(pm->rle) == 0) continue;

    const Moments lens_m = moments(refined_spans(lm));
    const Moments pupil_m = moments(refined_spans(*pm));
    FrameGeometry g;
    g.frame_index = lm.frame_index;
    g.lens_center = centroid_of(lens_m);
    g.pupil_center = centroid_of(pupil_m);
    g.lens_area = static_cast<double>(lens_m.count);
    g.pupil_area = static_cast<double>(pupil_m.count);
    g.rel_pos = g.lens_center - g.pupil_center;
    track.push_back(g);
  }
  if (track.empty())
    throw Error(ErrorCode::kNoOverlap,
                any_common ? "every common frame has an empty lens or pupil mask"
                           : "lens and pupil masks share no frame at or after " + std::to_string(start_frame));
  return track;
}

}  // namespace iolkin::geometry
