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

#include "iolkin/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iolkin/error.hpp"

namespace iolkin::kinematics {

std::string_view to_string(InstabilityMode mode) {
  return mode == InstabilityMode::kLiteral ? "literal" : "displacement";
}

InstabilityMode instability_mode_from_string(std::string_view name) {
  if (name == "literal") return InstabilityMode::kLiteral;
  if (name == "displacement") return InstabilityMode::kDisplacement;
  throw Error(ErrorCode::kInvalidArgument, "instability_mode must be \"literal\" or \"displacement\"");
}

std::vector<double> smooth_area(std::span<const double> values, int window) {
  if (window < 1 || window % 2 == 0) throw Error(ErrorCode::kInvalidArgument, "smoothing window must be odd and positive");
  const std::size_t n = values.size();
  const auto half = static_cast<std::size_t>(window / 2);
  std::vector<double> out(values.begin(), values.end());
  if (n < static_cast<std::size_t>(window)) return out;
  for (std::size_t i = half; i + half < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = i - half; j <= i + half; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(window);
  }
  return out;
}

std::size_t unfolding_time(std::span<const double> smoothed) {
  if (smoothed.empty()) throw Error(ErrorCode::kEmptySeries, "area series is empty");
  return static_cast<std::size_t>(std::max_element(smoothed.begin(), smoothed.end()) - smoothed.begin());
}

double instability(std::span<const Point2> rel_positions, InstabilityMode mode) {
  if (rel_positions.size() < 2)
    throw Error(ErrorCode::kTooFewSamples, "instability needs at least two tracked frames");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < rel_positions.size(); ++i) {
    const Point2 a = rel_positions[i];
    const Point2 b = rel_positions[i + 1];
    total += mode == InstabilityMode::kLiteral ? std::abs(b.norm() - a.norm()) : (b - a).norm();
  }
  return total;
}

double angular_diff(double a_deg, double b_deg) {
  const double d = std::fmod(std::abs(a_deg - b_deg), 180.0);
  return std::min(d, 180.0 - d);
}

double rotation(std::span<const hookpose::OrientationSample> orientations, FrameIndex from_frame) {
  const hookpose::OrientationSample* prev = nullptr;
  double total = 0.0;
  for (const auto& s : orientations) {
    if (s.frame_index < from_frame) continue;
    if (prev != nullptr) {
      if (s.frame_index <= prev->frame_index)
        throw Error(ErrorCode::kInvariantViolation, "orientation samples must be in increasing frame order");
      total += angular_diff(s.angle_deg, prev->angle_deg);
    }
    prev = &s;
  }
  if (prev == nullptr)
    throw Error(ErrorCode::kNoOrientationAfterUnfold,
                "no lens orientation at or after frame " + std::to_string(from_frame));
  return total;
}

FrameIndex track_unfolding_offset(std::span<const geometry::FrameGeometry> track, FrameIndex start_frame,
                                  int smooth_window) {
  std::vector<double> areas;
  areas.reserve(track.size());
  for (const auto& g : track) areas.push_back(g.lens_area);
  const std::size_t idx = unfolding_time(smooth_area(areas, smooth_window));
  return track[idx].frame_index - start_frame;
}

VideoReport compute_report(std::span<const geometry::FrameGeometry> track,
                           std::span<const hookpose::OrientationSample> orientations, FrameIndex start_frame,
                           const ReportOptions& options) {
  if (track.empty()) throw Error(ErrorCode::kEmptySeries, "track is empty");
  VideoReport r;
  r.post_implantation_start_frame = start_frame;
  r.instability_mode = options.instability_mode;
  r.n_track_samples = track.size();
  r.n_frames = track.back().frame_index - start_frame + 1;

  r.t_u_frames = track_unfolding_offset(track, start_frame, options.smooth_window);
  r.t_u_seconds = static_cast<double>(r.t_u_frames) / kFramesPerSecond;

  std::vector<Point2> rel;
  rel.reserve(track.size());
  for (const auto& g : track) rel.push_back(g.rel_pos);
  r.instability_px = instability(rel, options.instability_mode);

  const FrameIndex unfold_frame = start_frame + r.t_u_frames;
  r.rotation_deg = rotation(orientations, unfold_frame);

  const FrameIndex last = track.back().frame_index;
  r.n_orientation_samples = static_cast<std::size_t>(
      std::count_if(orientations.begin(), orientations.end(), [&](const hookpose::OrientationSample& s) {
        return s.frame_index >= unfold_frame && s.frame_index <= last;
      }));
  r.coverage = static_cast<double>(r.n_orientation_samples) / static_cast<double>(last - unfold_frame + 1);
  r.low_coverage = r.coverage < options.coverage_min;
  return r;
}

}  // namespace iolkin::kinematics
