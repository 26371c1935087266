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

// Per-video orchestration and the batch study driver.
//
// A video runs through the stages ingest, phase, geometry, kinematics,
// hookpose and rotation. Any failure is rethrown as iolkin::Error tagged with
// the stage name.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iolkin/hookpose.hpp"
#include "iolkin/ingest.hpp"
#include "iolkin/kinematics.hpp"
#include "iolkin/phase.hpp"
#include "iolkin/stats.hpp"

namespace iolkin::pipeline {

struct Config {
  double conf_threshold = hookpose::kDefaultConfidenceThreshold;
  double opposition_tol_deg = hookpose::kDefaultOppositionTolDeg;
  double phase_threshold = phase::kDefaultThreshold;
  int smooth_window = kinematics::kDefaultSmoothWindow;
  kinematics::InstabilityMode instability_mode = kinematics::InstabilityMode::kLiteral;
  stats::TTestMode ttest_mode = stats::TTestMode::kStandard;
  double coverage_min = kinematics::kDefaultCoverageMin;
  unsigned workers = 1;  // 0: one per hardware thread
};

/// Missing keys keep their defaults; unknown keys and bad values throw
/// InvalidArgument.
Config config_from_json(const std::string& text);
std::string config_to_json(const Config& config);

struct VideoStreams {
  MaskSet masks;
  std::vector<DetectionRecord> detections;
  PhaseProbSeries phase;
};

struct VideoPaths {
  std::filesystem::path masks;
  std::filesystem::path detections;
  std::filesystem::path phase;
};

/// Parses the three streams; errors carry stage "ingest".
VideoStreams load_video(const VideoPaths& paths);
VideoStreams parse_video(const std::string& masks_jsonl, const std::string& detections_jsonl,
                         const std::string& phase_csv);

struct VideoResult {
  phase::ClipLabeling clips;
  phase::ImplantationInterval interval;
  kinematics::VideoReport report;
  std::vector<hookpose::OrientationSample> orientations;
  Config config;
};

/// Lens centre used for the hook stage of one frame: the most confident lens
/// box above the threshold, else the refined mask centroid, else nullopt.
std::optional<Point2> lens_center_for_frame(std::span<const DetectionRecord> frame_dets,
                                            const std::optional<Point2>& mask_centroid, double conf_threshold);

VideoResult run_video(const VideoStreams& streams, const Config& config = {});
VideoResult run_video(const VideoPaths& paths, const Config& config = {});

struct ManifestVideo {
  VideoPaths paths;  // absolute, or relative to the working directory
};

struct ManifestBrand {
  std::string name;
  std::vector<ManifestVideo> videos;
};

struct Manifest {
  std::vector<ManifestBrand> brands;
};

/// {"brands":[{"name":..,"videos":[{"masks":..,"detections":..,"phase":..}]}]}.
/// Relative paths are resolved against `base_dir`. Brand names must be
/// unique and non-empty.
Manifest manifest_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
Manifest load_manifest(const std::filesystem::path& path);

struct VideoFailure {
  std::string stage;
  std::string code;
  std::string message;
};

struct VideoOutcome {
  std::string brand;
  std::size_t index = 0;
  VideoPaths paths;
  std::optional<VideoResult> result;
  std::optional<VideoFailure> failure;
};

struct ExcludedBrand {
  std::string name;
  std::size_t usable_videos = 0;
  std::string reason;
};

struct StudyOutcome {
  std::vector<VideoOutcome> videos;  // manifest order
  std::vector<ExcludedBrand> excluded;
  stats::StudyResult result;
  Config config;
};

inline constexpr std::size_t kMinVideosPerBrand = 3;

/// Runs every video on `config.workers` threads. Failed videos are recorded;
/// brands with fewer than three usable videos are excluded. Throws
/// InsufficientBrands when fewer than two brands remain.
StudyOutcome run_study(const Manifest& manifest, const Config& config = {});

// Reports ---------------------------------------------------------------------

std::string video_report_json(const VideoResult& result);
std::string study_report_json(const StudyOutcome& outcome);
/// brand,measure,n,q1,median,q3,iqr,lower_whisker,upper_whisker,outliers
std::string boxplot_csv(const stats::StudyResult& result);

// Backend evaluation ----------------------------------------------------------

/// Compares a predicted stream with a ground-truth stream of the same kind.
/// Mask streams give per-class mean IoU and Dice over the union of frames (a
/// frame missing on one side counts as an empty mask). Detection streams give
/// per-class AP at IoU 0.5, their mean, and the orientation error over frames
/// where both sides yield a lens orientation. Returns a JSON document.
std::string evaluate_streams(const std::string& pred_text, const std::string& gt_text, const Config& config = {});

}  // namespace iolkin::pipeline
