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

// Clip-level implantation phase labelling.
//
// A video is cut into consecutive 3 s clips (75 frames at 25 fps) aligned to
// frame 0. Each clip is split into five 15-frame subsequences, one keyframe
// is taken from each, and the per-frame implantation probabilities of the
// keyframes are averaged into a clip probability. Thresholding gives one
// label per clip. The post-implantation phase starts right after the longest
// run of positive clips.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "iolkin/ingest.hpp"
#include "iolkin/random.hpp"

namespace iolkin::phase {

inline constexpr FrameIndex kClipFrames = 75;
inline constexpr FrameIndex kSubsequenceFrames = 15;
inline constexpr std::size_t kSamplesPerClip = 5;
inline constexpr double kDefaultThreshold = 0.5;

enum class SamplingMode { kStochastic, kUniform };

struct ClipLabeling {
  FrameIndex clip_len_frames = kClipFrames;
  std::vector<double> clip_probs;
  std::vector<bool> labels;
  double threshold = kDefaultThreshold;
};

struct ImplantationInterval {
  std::size_t first_clip = 0;
  std::size_t last_clip = 0;
  FrameIndex post_implantation_start_frame = 0;
};

/// One keyframe per 15-frame subsequence of the clip starting at
/// `clip_start`. Uniform mode takes the centre frame (offset 7); stochastic
/// mode draws uniformly inside each subsequence. `frame_count` is the number
/// of frames in the video; a clip that does not fit is ClipTruncated.
std::array<FrameIndex, kSamplesPerClip> sample_clip_frames(FrameIndex clip_start, FrameIndex frame_count,
                                                           SamplingMode mode, Rng* rng = nullptr);

/// Arithmetic mean of exactly five probabilities (ArityError otherwise).
double aggregate_clip_probability(std::span<const double> probabilities);

/// Labels every full clip covered by the series using uniform sampling. A
/// keyframe missing from the series is replaced by the nearest available
/// frame of the same subsequence (earlier on ties).
ClipLabeling classify_clips(const PhaseProbSeries& series, double threshold = kDefaultThreshold);

/// Longest run of positive labels, earliest on ties.
ImplantationInterval locate_implantation_interval(const std::vector<bool>& labels);

}  // namespace iolkin::phase
