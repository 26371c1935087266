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

#include "iolkin/phase.hpp"

#include <algorithm>
#include <string>

#include "iolkin/error.hpp"

namespace iolkin::phase {

std::array<FrameIndex, kSamplesPerClip> sample_clip_frames(FrameIndex clip_start, FrameIndex frame_count,
                                                           SamplingMode mode, Rng* rng) {
  if (clip_start < 0) throw Error(ErrorCode::kInvalidArgument, "clip start must be non-negative");
  if (clip_start + kClipFrames > frame_count)
    throw Error(ErrorCode::kClipTruncated, "clip starting at frame " + std::to_string(clip_start) +
                                               " has fewer than 75 frames");
  if (mode == SamplingMode::kStochastic && rng == nullptr)
    throw Error(ErrorCode::kInvalidArgument, "stochastic sampling needs a generator");

  std::array<FrameIndex, kSamplesPerClip> frames{};
  for (std::size_t k = 0; k < kSamplesPerClip; ++k) {
    const FrameIndex sub_start = clip_start + static_cast<FrameIndex>(k) * kSubsequenceFrames;
    const FrameIndex offset = mode == SamplingMode::kUniform
                                  ? kSubsequenceFrames / 2
                                  : static_cast<FrameIndex>(rng->index(kSubsequenceFrames));
    frames[k] = sub_start + offset;
  }
  return frames;
}

double aggregate_clip_probability(std::span<const double> probabilities) {
  if (probabilities.size() != kSamplesPerClip)
    throw Error(ErrorCode::kArityError,
                "expected 5 probabilities, got " + std::to_string(probabilities.size()));
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvariantViolation, "probability outside [0,1]");
    sum += p;
  }
  return std::clamp(sum / static_cast<double>(kSamplesPerClip), 0.0, 1.0);
}

namespace {

double probability_near(const std::vector<PhaseEntry>& entries, FrameIndex target, FrameIndex sub_start) {
  const FrameIndex sub_end = sub_start + kSubsequenceFrames;
  auto it = std::lower_bound(entries.begin(), entries.end(), target,
                             [](const PhaseEntry& e, FrameIndex f) { return e.frame_index < f; });
  if (it != entries.end() && it->frame_index == target) return it->probability;

  const PhaseEntry* best = nullptr;
  FrameIndex best_dist = 0;
  if (it != entries.begin()) {
    const PhaseEntry& before = *std::prev(it);
    if (before.frame_index >= sub_start) {
      best = &before;
      best_dist = target - before.frame_index;
    }
  }
  if (it != entries.end() && it->frame_index < sub_end) {
    const FrameIndex d = it->frame_index - target;
    if (best == nullptr || d < best_dist) best = &*it;
  }
  if (best == nullptr)
    throw Error(ErrorCode::kMissingFrame, "no phase probability in frames [" + std::to_string(sub_start) + ", " +
                                              std::to_string(sub_end) + ")");
  return best->probability;
}

}  // namespace

ClipLabeling classify_clips(const PhaseProbSeries& series, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in (0,1)");
  validate(series);
  if (series.entries.empty()) throw Error(ErrorCode::kEmptySeries, "phase series is empty");
  const FrameIndex frame_count = series.entries.back().frame_index + 1;
  const FrameIndex clips = frame_count / kClipFrames;
  if (clips == 0) throw Error(ErrorCode::kEmptySeries, "phase series covers no full 75-frame clip");

  ClipLabeling out;
  out.threshold = threshold;
  out.clip_probs.reserve(static_cast<std::size_t>(clips));
  out.labels.reserve(static_cast<std::size_t>(clips));
  for (FrameIndex c = 0; c < clips; ++c) {
    const FrameIndex start = c * kClipFrames;
    const auto keyframes = sample_clip_frames(start, frame_count, SamplingMode::kUniform);
    std::array<double, kSamplesPerClip> probs{};
    for (std::size_t k = 0; k < kSamplesPerClip; ++k)
      probs[k] = probability_near(series.entries, keyframes[k],
                                  start + static_cast<FrameIndex>(k) * kSubsequenceFrames);
    const double p = aggregate_clip_probability(probs);
    out.clip_probs.push_back(p);
    out.labels.push_back(p >= threshold);
  }
  return out;
}

ImplantationInterval locate_implantation_interval(const std::vector<bool>& labels) {
  std::size_t best_start = 0;
  std::size_t best_len = 0;
  std::size_t run_start = 0;
  std::size_t run_len = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      if (run_len == 0) run_start = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_start = run_start;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len == 0) throw Error(ErrorCode::kNoImplantationDetected, "no clip labelled as implantation");
  ImplantationInterval interval;
  interval.first_clip = best_start;
  interval.last_clip = best_start + best_len - 1;
  interval.post_implantation_start_frame = static_cast<FrameIndex>(interval.last_clip + 1) * kClipFrames;
  return interval;
}

}  // namespace iolkin::phase
