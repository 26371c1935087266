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

// Interchange formats between detector/segmenter backends and the analysis
// core:
//
//   masks.jsonl       {"frame":int,"class":"lens"|"pupil","w":int,"h":int,"rle":[int,...]}
//   detections.jsonl  {"frame":int,"class":"lens"|"hook","bbox":[x,y,w,h],"conf":float}
//   phase.csv         header "frame,prob", one row per frame
//
// Masks are run-length encoded row-major, background first. A leading 0
// means the first pixel is foreground. The serializers below emit the
// canonical byte form; parsing then serializing a canonical file reproduces
// it exactly.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iolkin/types.hpp"

namespace iolkin {

enum class MaskClass { kLens, kPupil };
enum class DetClass { kLens, kHook };

std::string_view to_string(MaskClass c);
std::string_view to_string(DetClass c);

/// Row-major binary image. Cells are 0 or 1.
struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;

  Bitmap() = default;
  Bitmap(int w, int h) : width(w), height(h), cells(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) {
    cells[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  friend bool operator==(const Bitmap&, const Bitmap&) = default;
};

struct MaskFrame {
  FrameIndex frame_index = 0;
  MaskClass class_label = MaskClass::kLens;
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> rle;

  friend bool operator==(const MaskFrame&, const MaskFrame&) = default;
};

struct MaskSequence {
  MaskClass class_label = MaskClass::kLens;
  std::vector<MaskFrame> frames;

  /// Frame with the given index, or nullptr.
  const MaskFrame* find(FrameIndex frame) const;
};

/// Lens and pupil sequences read from one masks.jsonl stream.
struct MaskSet {
  MaskSequence lens{MaskClass::kLens, {}};
  MaskSequence pupil{MaskClass::kPupil, {}};
};

struct DetectionRecord {
  FrameIndex frame_index = 0;
  DetClass class_label = DetClass::kHook;
  BBox bbox;
  double confidence = 0.0;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct PhaseEntry {
  FrameIndex frame_index = 0;
  double probability = 0.0;
};

struct PhaseProbSeries {
  double fps = kFramesPerSecond;
  std::vector<PhaseEntry> entries;
};

/// Horizontal run of foreground pixels [x_begin, x_end) on row y.
struct RowSpan {
  int y = 0;
  int x_begin = 0;
  int x_end = 0;
};

// RLE <-> bitmap ------------------------------------------------------------

/// Checks the MaskFrame RLE invariants. Throws LengthMismatch or
/// InvariantViolation.
void validate_rle(std::span<const std::uint32_t> rle, int width, int height);

Bitmap decode_rle(std::span<const std::uint32_t> rle, int width, int height);
std::vector<std::uint32_t> encode_rle(const Bitmap& bitmap);

/// Foreground spans in row-major order. Runs crossing row ends are split.
std::vector<RowSpan> rle_to_spans(std::span<const std::uint32_t> rle, int width);
/// Canonical RLE of a set of spans given in row-major order, non-overlapping.
std::vector<std::uint32_t> spans_to_rle(std::span<const RowSpan> spans, int width, int height);

Bitmap decode(const MaskFrame& mask);
MaskFrame encode(const Bitmap& bitmap, FrameIndex frame, MaskClass label);

/// Number of foreground pixels.
std::uint64_t foreground_count(std::span<const std::uint32_t> rle);

// Record validation -----------------------------------------------------------

void validate(const MaskFrame& mask);
void validate(const MaskSequence& sequence);
/// When frame dimensions are given the bbox must also lie inside them.
void validate(const DetectionRecord& det, std::optional<std::pair<int, int>> frame_size = {});
void validate(const PhaseProbSeries& series);

// Parsing -------------------------------------------------------------------

MaskFrame parse_mask_record(std::string_view line, std::size_t line_number = 1);
DetectionRecord parse_detection_record(std::string_view line, std::size_t line_number = 1);

/// Reads a masks.jsonl stream. Each class must appear in strictly increasing
/// frame order with constant dimensions. An empty stream is EmptySequence.
MaskSet parse_mask_stream(std::istream& in);
/// Reads a detections.jsonl stream, frame indices non-decreasing.
std::vector<DetectionRecord> parse_detection_stream(std::istream& in);
/// Reads a phase.csv stream, frame indices strictly increasing.
PhaseProbSeries parse_phase_series(std::istream& in);

// Canonical serialization -----------------------------------------------------

/// Shortest decimal that round-trips to the same double.
std::string format_real(double value);

std::string serialize(const MaskFrame& mask);
std::string serialize(const DetectionRecord& det);

void write_mask_stream(std::ostream& out, std::span<const MaskFrame> frames);
void write_detection_stream(std::ostream& out, std::span<const DetectionRecord> dets);
void write_phase_series(std::ostream& out, const PhaseProbSeries& series);

}  // namespace iolkin
