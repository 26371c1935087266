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

// Deterministic synthetic surgeries with programmed lens kinematics.
//
// A video is `n_frames` long. Clips [first_clip, last_clip] carry high
// implantation probability; the post-implantation phase starts at
// (last_clip + 1) * 75 and masks/detections are emitted from there on. All
// per-frame lens parameters are functions of the offset k from that start:
//
//   size         semi-axes grow from the folded scales to full size along a
//                logistic curve that is rescaled to reach full size exactly at
//                `unfold_plateau` and stays there
//   position     lens centre = pupil centre + piecewise-linear drift
//   orientation  piecewise-linear major-axis angle, degrees
//   hooks        on the major axis at +/-(current semi-major + hook_offset)
//
// Ground truth is derived from these noiseless paths with the kinematics
// formulas themselves, so it is what a perfect segmenter/detector would
// yield before rasterization.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "iolkin/geometry.hpp"
#include "iolkin/ingest.hpp"
#include "iolkin/types.hpp"

namespace iolkin::synth {

struct DriftWaypoint {
  double frame = 0.0;  // offset from the post-implantation start
  double dx = 0.0;     // lens centre relative to the pupil centre
  double dy = 0.0;
};

struct AngleWaypoint {
  double frame = 0.0;
  double deg = 0.0;
};

/// Instrument shadow over the lens for frame offsets [start, end): a wedge
/// whose tip sits `depth_px` inside the lens boundary in direction
/// `direction_deg` and which opens outward with full angle `opening_deg`.
struct OcclusionEvent {
  FrameIndex start = 0;
  FrameIndex end = 0;
  double direction_deg = 0.0;
  double opening_deg = 20.0;
  double depth_px = 10.0;
};

struct DetectionNoise {
  double center_jitter_px = 0.0;  // Gaussian sigma on every box centre
  double lens_conf = 0.95;
  double hook_conf_min = 0.85;
  double hook_conf_max = 0.99;
  double dropout_rate = 0.0;      // per hook: not emitted
  double low_conf_rate = 0.0;     // per hook: emitted with confidence in [0.3, 0.6]
  double spurious_rate = 0.0;     // per frame: one false hook box
  // Share of false boxes that double-detect an emitted hook: placed within
  // duplicate_radius_px of it, with its confidence scaled by a factor drawn
  // from [duplicate_conf_ratio_min, duplicate_conf_ratio_max]. The rest land
  // anywhere on the lens with confidence in [spurious_conf_min, spurious_conf_max].
  double duplicate_fraction = 1.0;
  double duplicate_radius_px = 4.0;
  double duplicate_conf_ratio_min = 0.7;
  double duplicate_conf_ratio_max = 0.95;
  double spurious_conf_min = 0.61;
  double spurious_conf_max = 0.8;
};

/// Gaussian noise on both semi-axes. The sigma applies to the fully folded
/// lens and fades linearly with unfolding progress, so the unfolded lens is
/// clean unless jitter_after_unfold keeps the full sigma throughout.
struct MaskNoise {
  double boundary_jitter_px = 0.0;
  bool jitter_after_unfold = false;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  int width = 192;
  int height = 192;
  FrameIndex n_frames = 900;
  std::size_t implantation_first_clip = 2;
  std::size_t implantation_last_clip = 4;
  double phase_prob_in = 0.9;
  double phase_prob_out = 0.08;
  double phase_noise = 0.0;

  Point2 pupil_center{96.0, 96.0};
  double pupil_radius = 70.0;

  double semi_major = 40.0;
  double semi_minor = 40.0;
  double folded_major_scale = 0.8;
  double folded_minor_scale = 0.3;
  double unfold_midpoint = 60.0;
  double unfold_steepness = 0.08;
  double unfold_plateau = 120.0;
  std::vector<DriftWaypoint> drift;        // empty: lens stays at the pupil centre
  std::vector<AngleWaypoint> orientation;  // empty: constant 0 deg
  double hook_offset = 8.0;
  double hook_box = 8.0;

  std::vector<OcclusionEvent> occlusions;
  DetectionNoise detection;
  MaskNoise mask;
};

struct FrameTruth {
  FrameIndex frame_index = 0;
  Point2 lens_center;
  Point2 rel_pos;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double area = 0.0;  // continuous ellipse area
  double orientation_deg = 0.0;
};

struct SynthGroundTruth {
  FrameIndex post_implantation_start_frame = 0;
  FrameIndex plateau_offset = 0;
  FrameIndex t_u_frames = 0;  // first argmax of the mean-filtered true area
  double instability_literal = 0.0;
  double instability_displacement = 0.0;
  double rotation_deg = 0.0;
  std::vector<FrameTruth> frames;
};

struct SynthVideo {
  std::string masks_jsonl;
  std::string detections_jsonl;
  std::string phase_csv;
  SynthGroundTruth truth;
};

/// Throws SpecInvalid naming the offending field.
void validate(const SynthSpec& spec);

FrameIndex post_implantation_start(const SynthSpec& spec);

/// Fraction of full size reached at offset k: 0 before unfolding starts,
/// exactly 1 from the plateau on.
double unfold_progress(const SynthSpec& spec, double k);

/// Noiseless per-frame truth and the derived kinematics. Cheap: no rendering.
SynthGroundTruth ground_truth(const SynthSpec& spec);

/// Renders the three interchange streams. Same spec, same bytes.
SynthVideo generate_video(const SynthSpec& spec);

/// Pixel spans of a filled rotated ellipse minus optional wedges, clipped to
/// the frame. A pixel is inside when its centre is.
std::vector<RowSpan> rasterize_lens(int width, int height, Point2 center, double semi_major, double semi_minor,
                                    double angle_deg, const std::vector<OcclusionEvent>& wedges = {});

/// True when pixel centre p is covered by the wedge of `event` on a lens with
/// the given centre and extent along the wedge direction.
bool in_wedge(Point2 p, Point2 lens_center, double boundary_distance, const OcclusionEvent& event);

/// Distance from the centre to an ellipse boundary along direction_deg.
double ellipse_radius_along(double semi_major, double semi_minor, double axis_deg, double direction_deg);

// Studies ---------------------------------------------------------------------

struct BrandSpec {
  std::string name;
  std::size_t videos = 20;
  SynthSpec base;
  double rotation_mean_deg = 15.0;
  double rotation_sd_deg = 3.0;
  double unfold_mean_s = 4.0;
  double unfold_sd_s = 1.0;
  double drift_mean_px = 20.0;
  double drift_sd_px = 5.0;
};

struct StudySpec {
  std::uint64_t seed = 1;
  std::vector<BrandSpec> brands;
};

struct StudyVideoSpec {
  std::string brand;
  std::size_t index = 0;
  SynthSpec spec;
  double programmed_rotation_deg = 0.0;
};

/// One video spec per brand video, drawn from the brand distributions.
/// Throws SpecInvalid for an empty brand list.
std::vector<StudyVideoSpec> make_study_specs(const StudySpec& study);

struct StudyVideo {
  std::string brand;
  std::size_t index = 0;
  std::string directory;  // relative to the study root
  SynthVideo video;
};

struct StudyBundle {
  std::string manifest_json;
  std::vector<StudyVideo> videos;
};

StudyBundle generate_study(const StudySpec& study);

// JSON mirrors ----------------------------------------------------------------

SynthSpec spec_from_json(const std::string& text);
std::string spec_to_json(const SynthSpec& spec);
StudySpec study_from_json(const std::string& text);
std::string truth_to_json(const SynthGroundTruth& truth);
/// True when the document describes a study (has a "brands" key).
bool is_study_json(const std::string& text);

/// Writes masks.jsonl, detections.jsonl, phase.csv and truth.json.
void write_video(const SynthVideo& video, const std::filesystem::path& dir);
/// Writes every video under its directory plus manifest.json.
void write_study(const StudyBundle& bundle, const std::filesystem::path& dir);

}  // namespace iolkin::synth
