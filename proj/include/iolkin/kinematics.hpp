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

// Per-video lens statistics over the post-implantation track:
//
//   unfolding time  first index where the mean-filtered lens area peaks
//   instability     accumulated change of the lens position inside the pupil
//   rotation        accumulated axis-angle change from the unfolding time on
//
// Track indices are sample positions, frame offsets are measured from the
// post-implantation start frame. They coincide when no frame is missing.

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "iolkin/geometry.hpp"
#include "iolkin/hookpose.hpp"
#include "iolkin/types.hpp"

namespace iolkin::kinematics {

inline constexpr int kDefaultSmoothWindow = 15;
inline constexpr double kDefaultCoverageMin = 0.3;

/// How consecutive relative positions r_i are accumulated.
///   kLiteral       sum | |r_{i+1}| - |r_i| |   (distance to pupil centre)
///   kDisplacement  sum | r_{i+1} - r_i |       (path length)
enum class InstabilityMode { kLiteral, kDisplacement };

std::string_view to_string(InstabilityMode mode);
InstabilityMode instability_mode_from_string(std::string_view name);

struct AreaSeries {
  std::vector<double> values;
  std::vector<double> smoothed;
  int window = kDefaultSmoothWindow;
};

struct VideoReport {
  FrameIndex post_implantation_start_frame = 0;
  FrameIndex t_u_frames = 0;
  double t_u_seconds = 0.0;
  double instability_px = 0.0;
  double rotation_deg = 0.0;
  FrameIndex n_frames = 0;  // frames from the post-implantation start to the last tracked frame
  std::size_t n_track_samples = 0;
  std::size_t n_orientation_samples = 0;
  double coverage = 0.0;  // valid orientations per frame from the unfolding time on
  bool low_coverage = false;
  InstabilityMode instability_mode = InstabilityMode::kLiteral;
};

/// Centred moving average of odd width `window`. Samples whose full window
/// does not fit keep their raw value.
std::vector<double> smooth_area(std::span<const double> values, int window = kDefaultSmoothWindow);

/// Smallest index attaining the maximum. Throws EmptySeries.
std::size_t unfolding_time(std::span<const double> smoothed);

/// Throws TooFewSamples below two samples.
double instability(std::span<const Point2> rel_positions, InstabilityMode mode = InstabilityMode::kLiteral);

/// Axis-angle difference in [0, 90]: min(d, 180 - d) with d = |a - b| mod 180.
double angular_diff(double a_deg, double b_deg);

/// Sum of angular_diff between consecutive samples whose frame is at least
/// `from_frame`. Missing frames are bridged to the next sample. Samples must
/// be in increasing frame order. Throws NoOrientationAfterUnfold.
double rotation(std::span<const hookpose::OrientationSample> orientations, FrameIndex from_frame);

struct ReportOptions {
  int smooth_window = kDefaultSmoothWindow;
  InstabilityMode instability_mode = InstabilityMode::kLiteral;
  double coverage_min = kDefaultCoverageMin;
};

/// Unfolding time of a track as a frame offset from `start_frame`.
FrameIndex track_unfolding_offset(std::span<const geometry::FrameGeometry> track, FrameIndex start_frame,
                                  int smooth_window = kDefaultSmoothWindow);

/// Assembles unfolding time, instability and rotation for one video.
VideoReport compute_report(std::span<const geometry::FrameGeometry> track,
                           std::span<const hookpose::OrientationSample> orientations, FrameIndex start_frame,
                           const ReportOptions& options = {});

}  // namespace iolkin::kinematics
