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

#include "iolkin/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "iolkin/error.hpp"

namespace iolkin {

namespace {

using json = nlohmann::json;

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::string_view trim_cr(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  return line;
}

[[noreturn]] void fail(ErrorCode code, const std::string& msg, std::size_t line) {
  throw Error(code, msg, line);
}

json parse_json_line(std::string_view line, std::size_t line_number) {
  json obj = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) fail(ErrorCode::kParseError, "malformed JSON record", line_number);
  if (!obj.is_object()) fail(ErrorCode::kParseError, "record is not a JSON object", line_number);
  return obj;
}

const json& field(const json& obj, const char* key, std::size_t line_number) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::kParseError, std::string("missing key \"") + key + "\"", line_number);
  return *it;
}

std::int64_t integer_field(const json& obj, const char* key, std::size_t line_number) {
  const json& v = field(obj, key, line_number);
  if (!v.is_number_integer())
    fail(ErrorCode::kParseError, std::string("\"") + key + "\" must be an integer", line_number);
  return v.get<std::int64_t>();
}

double real_value(const json& v, const char* what, std::size_t line_number) {
  if (!v.is_number()) fail(ErrorCode::kParseError, std::string(what) + " must be a number", line_number);
  return v.get<double>();
}

std::string string_field(const json& obj, const char* key, std::size_t line_number) {
  const json& v = field(obj, key, line_number);
  if (!v.is_string())
    fail(ErrorCode::kParseError, std::string("\"") + key + "\" must be a string", line_number);
  return v.get<std::string>();
}

// Re-raises validation failures with the offending line attached.
template <typename F>
void with_line(std::size_t line_number, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    if (e.line()) throw;
    throw Error(e.code(), e.detail(), line_number);
  }
}

}  // namespace

std::string_view to_string(MaskClass c) { return c == MaskClass::kLens ? "lens" : "pupil"; }
std::string_view to_string(DetClass c) { return c == DetClass::kLens ? "lens" : "hook"; }

const MaskFrame* MaskSequence::find(FrameIndex frame) const {
  auto it = std::lower_bound(frames.begin(), frames.end(), frame,
                             [](const MaskFrame& m, FrameIndex f) { return m.frame_index < f; });
  if (it == frames.end() || it->frame_index != frame) return nullptr;
  return &*it;
}

// RLE --------------------------------------------------------------------------

void validate_rle(std::span<const std::uint32_t> rle, int width, int height) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::kInvariantViolation, "mask dimensions must be positive");
  if (rle.empty()) throw Error(ErrorCode::kInvariantViolation, "rle must be non-empty");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < rle.size(); ++i) {
    if (i > 0 && rle[i] == 0)
      throw Error(ErrorCode::kInvariantViolation,
                  "rle run " + std::to_string(i) + " is zero; only the first run may be zero");
    total += rle[i];
  }
  const auto expected = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  if (total != expected)
    throw Error(ErrorCode::kLengthMismatch, "sum(rle)=" + std::to_string(total) +
                                                " but w*h=" + std::to_string(expected));
}

Bitmap decode_rle(std::span<const std::uint32_t> rle, int width, int height) {
  validate_rle(rle, width, height);
  Bitmap out(width, height);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < rle.size(); ++i) {
    if (i % 2 == 1) std::fill_n(out.cells.begin() + static_cast<std::ptrdiff_t>(pos), rle[i], 1);
    pos += rle[i];
  }
  return out;
}

std::vector<std::uint32_t> encode_rle(const Bitmap& bitmap) {
  const std::size_t n = static_cast<std::size_t>(bitmap.width) * bitmap.height;
  if (bitmap.width <= 0 || bitmap.height <= 0 || bitmap.cells.size() != n)
    throw Error(ErrorCode::kLengthMismatch, "bitmap size does not match width*height");
  std::vector<std::uint32_t> rle;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t v = bitmap.cells[i] ? 1 : 0;
    if (v != current) {
      rle.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  rle.push_back(run);
  return rle;
}

std::vector<RowSpan> rle_to_spans(std::span<const std::uint32_t> rle, int width) {
  std::vector<RowSpan> spans;
  std::uint64_t pos = 0;
  const auto w = static_cast<std::uint64_t>(width);
  for (std::size_t i = 0; i < rle.size(); ++i) {
    const std::uint64_t end = pos + rle[i];
    if (i % 2 == 1) {
      std::uint64_t p = pos;
      while (p < end) {
        const std::uint64_t row = p / w;
        const std::uint64_t row_end = std::min(end, (row + 1) * w);
        spans.push_back({static_cast<int>(row), static_cast<int>(p - row * w),
                         static_cast<int>(row_end - row * w)});
        p = row_end;
      }
    }
    pos = end;
  }
  return spans;
}

std::vector<std::uint32_t> spans_to_rle(std::span<const RowSpan> spans, int width, int height) {
  const auto w = static_cast<std::uint64_t>(width);
  const std::uint64_t total = w * static_cast<std::uint64_t>(height);
  std::vector<std::uint32_t> rle;
  std::uint64_t cursor = 0;  // end of the last emitted run
  for (const RowSpan& s : spans) {
    if (s.x_end <= s.x_begin) continue;
    const std::uint64_t start = static_cast<std::uint64_t>(s.y) * w + static_cast<std::uint64_t>(s.x_begin);
    const std::uint64_t end = static_cast<std::uint64_t>(s.y) * w + static_cast<std::uint64_t>(s.x_end);
    if (start < cursor || end > total)
      throw Error(ErrorCode::kInvalidArgument, "spans must be ordered, disjoint and inside the frame");
    if (start == cursor && rle.size() % 2 == 0 && !rle.empty()) {
      rle.back() += static_cast<std::uint32_t>(end - start);  // contiguous with previous foreground
    } else {
      rle.push_back(static_cast<std::uint32_t>(start - cursor));
      rle.push_back(static_cast<std::uint32_t>(end - start));
    }
    cursor = end;
  }
  if (cursor < total || rle.empty()) rle.push_back(static_cast<std::uint32_t>(total - cursor));
  return rle;
}

Bitmap decode(const MaskFrame& mask) { return decode_rle(mask.rle, mask.width, mask.height); }

MaskFrame encode(const Bitmap& bitmap, FrameIndex frame, MaskClass label) {
  return MaskFrame{frame, label, bitmap.width, bitmap.height, encode_rle(bitmap)};
}

std::uint64_t foreground_count(std::span<const std::uint32_t> rle) {
  std::uint64_t n = 0;
  for (std::size_t i = 1; i < rle.size(); i += 2) n += rle[i];
  return n;
}

// Validation -------------------------------------------------------------------

void validate(const MaskFrame& mask) {
  if (mask.frame_index < 0) throw Error(ErrorCode::kInvariantViolation, "frame index must be non-negative");
  validate_rle(mask.rle, mask.width, mask.height);
}

void validate(const MaskSequence& sequence) {
  for (std::size_t i = 0; i < sequence.frames.size(); ++i) {
    const MaskFrame& m = sequence.frames[i];
    validate(m);
    if (m.class_label != sequence.class_label)
      throw Error(ErrorCode::kInvariantViolation, "frame class differs from sequence class");
    if (i > 0) {
      const MaskFrame& prev = sequence.frames[i - 1];
      if (m.frame_index <= prev.frame_index)
        throw Error(ErrorCode::kInvariantViolation, "frame_index must be strictly increasing");
      if (m.width != prev.width || m.height != prev.height)
        throw Error(ErrorCode::kInvariantViolation, "all frames must share width/height");
    }
  }
}

void validate(const DetectionRecord& det, std::optional<std::pair<int, int>> frame_size) {
  if (det.frame_index < 0) throw Error(ErrorCode::kInvariantViolation, "frame index must be non-negative");
  const BBox& b = det.bbox;
  if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) || !std::isfinite(b.h))
    throw Error(ErrorCode::kInvariantViolation, "bbox must be finite");
  if (!(b.w > 0.0) || !(b.h > 0.0)) throw Error(ErrorCode::kInvariantViolation, "bbox w and h must be positive");
  if (b.x < 0.0 || b.y < 0.0) throw Error(ErrorCode::kInvariantViolation, "bbox outside frame bounds");
  if (frame_size && (b.x + b.w > frame_size->first || b.y + b.h > frame_size->second))
    throw Error(ErrorCode::kInvariantViolation, "bbox outside frame bounds");
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0))
    throw Error(ErrorCode::kInvariantViolation, "confidence must lie in [0,1]");
}

void validate(const PhaseProbSeries& series) {
  if (!(series.fps > 0.0)) throw Error(ErrorCode::kInvariantViolation, "fps must be positive");
  for (std::size_t i = 0; i < series.entries.size(); ++i) {
    const PhaseEntry& e = series.entries[i];
    if (e.frame_index < 0) throw Error(ErrorCode::kInvariantViolation, "frame index must be non-negative");
    if (!(e.probability >= 0.0 && e.probability <= 1.0))
      throw Error(ErrorCode::kInvariantViolation, "probability must lie in [0,1]");
    if (i > 0 && e.frame_index <= series.entries[i - 1].frame_index)
      throw Error(ErrorCode::kInvariantViolation, "frame_index must be strictly increasing");
  }
}

// Parsing -----------------------------------------------------------------------

MaskFrame parse_mask_record(std::string_view line, std::size_t line_number) {
  const json obj = parse_json_line(line, line_number);
  MaskFrame m;
  m.frame_index = integer_field(obj, "frame", line_number);
  const std::string cls = string_field(obj, "class", line_number);
  if (cls == "lens") {
    m.class_label = MaskClass::kLens;
  } else if (cls == "pupil") {
    m.class_label = MaskClass::kPupil;
  } else {
    fail(ErrorCode::kInvariantViolation, "mask class must be \"lens\" or \"pupil\", got \"" + cls + "\"",
         line_number);
  }
  const std::int64_t w = integer_field(obj, "w", line_number);
  const std::int64_t h = integer_field(obj, "h", line_number);
  constexpr std::int64_t kMaxDim = 1 << 16;
  if (w <= 0 || h <= 0 || w > kMaxDim || h > kMaxDim)
    fail(ErrorCode::kInvariantViolation, "w and h must be positive (and at most 65536)", line_number);
  m.width = static_cast<int>(w);
  m.height = static_cast<int>(h);
  const json& runs = field(obj, "rle", line_number);
  if (!runs.is_array()) fail(ErrorCode::kParseError, "\"rle\" must be an array", line_number);
  m.rle.reserve(runs.size());
  for (const json& r : runs) {
    if (!r.is_number_integer()) fail(ErrorCode::kParseError, "rle entries must be integers", line_number);
    const auto v = r.get<std::int64_t>();
    if (v < 0 || v > std::numeric_limits<std::uint32_t>::max())
      fail(ErrorCode::kInvariantViolation, "rle entries must be non-negative", line_number);
    m.rle.push_back(static_cast<std::uint32_t>(v));
  }
  with_line(line_number, [&] { validate(m); });
  return m;
}

DetectionRecord parse_detection_record(std::string_view line, std::size_t line_number) {
  const json obj = parse_json_line(line, line_number);
  DetectionRecord d;
  d.frame_index = integer_field(obj, "frame", line_number);
  const std::string cls = string_field(obj, "class", line_number);
  if (cls == "lens") {
    d.class_label = DetClass::kLens;
  } else if (cls == "hook") {
    d.class_label = DetClass::kHook;
  } else {
    fail(ErrorCode::kInvariantViolation, "detection class must be \"lens\" or \"hook\", got \"" + cls + "\"",
         line_number);
  }
  const json& box = field(obj, "bbox", line_number);
  if (!box.is_array() || box.size() != 4)
    fail(ErrorCode::kParseError, "\"bbox\" must be an array [x,y,w,h]", line_number);
  d.bbox = {real_value(box[0], "bbox x", line_number), real_value(box[1], "bbox y", line_number),
            real_value(box[2], "bbox w", line_number), real_value(box[3], "bbox h", line_number)};
  d.confidence = real_value(field(obj, "conf", line_number), "\"conf\"", line_number);
  with_line(line_number, [&] { validate(d); });
  return d;
}

MaskSet parse_mask_stream(std::istream& in) {
  MaskSet set;
  std::string line;
  std::size_t line_number = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    MaskFrame m = parse_mask_record(line, line_number);
    MaskSequence& seq = m.class_label == MaskClass::kLens ? set.lens : set.pupil;
    if (!seq.frames.empty()) {
      const MaskFrame& prev = seq.frames.back();
      if (m.frame_index <= prev.frame_index)
        fail(ErrorCode::kInvariantViolation,
             std::string(to_string(m.class_label)) + " frame_index must be strictly increasing (" +
                 std::to_string(prev.frame_index) + " then " + std::to_string(m.frame_index) + ")",
             line_number);
      if (m.width != prev.width || m.height != prev.height)
        fail(ErrorCode::kInvariantViolation, "all frames of a class must share width/height", line_number);
    }
    seq.frames.push_back(std::move(m));
    ++records;
  }
  if (records == 0) throw Error(ErrorCode::kEmptySequence, "mask stream contains no records");
  return set;
}

std::vector<DetectionRecord> parse_detection_stream(std::istream& in) {
  std::vector<DetectionRecord> dets;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    DetectionRecord d = parse_detection_record(line, line_number);
    if (!dets.empty() && d.frame_index < dets.back().frame_index)
      fail(ErrorCode::kInvariantViolation,
           "frame_index must be non-decreasing (" + std::to_string(dets.back().frame_index) + " then " +
               std::to_string(d.frame_index) + ")",
           line_number);
    dets.push_back(d);
  }
  if (dets.empty()) throw Error(ErrorCode::kEmptySequence, "detection stream contains no records");
  return dets;
}

PhaseProbSeries parse_phase_series(std::istream& in) {
  PhaseProbSeries series;
  std::string raw;
  std::size_t line_number = 0;
  bool seen_header = false;
  while (std::getline(in, raw)) {
    ++line_number;
    if (is_blank(raw)) continue;
    const std::string_view line = trim_cr(raw);
    if (!seen_header) {
      if (line != "frame,prob") fail(ErrorCode::kParseError, "expected header \"frame,prob\"", line_number);
      seen_header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      fail(ErrorCode::kParseError, "expected two comma-separated fields", line_number);
    PhaseEntry e;
    const std::string_view f = line.substr(0, comma);
    const std::string_view p = line.substr(comma + 1);
    auto r1 = std::from_chars(f.data(), f.data() + f.size(), e.frame_index);
    if (r1.ec != std::errc{} || r1.ptr != f.data() + f.size())
      fail(ErrorCode::kParseError, "frame must be an integer", line_number);
    auto r2 = std::from_chars(p.data(), p.data() + p.size(), e.probability);
    if (r2.ec != std::errc{} || r2.ptr != p.data() + p.size())
      fail(ErrorCode::kParseError, "prob must be a real number", line_number);
    if (e.frame_index < 0) fail(ErrorCode::kInvariantViolation, "frame index must be non-negative", line_number);
    if (!(e.probability >= 0.0 && e.probability <= 1.0))
      fail(ErrorCode::kInvariantViolation, "probability must lie in [0,1]", line_number);
    if (!series.entries.empty() && e.frame_index <= series.entries.back().frame_index)
      fail(ErrorCode::kInvariantViolation, "frame_index must be strictly increasing", line_number);
    series.entries.push_back(e);
  }
  if (series.entries.empty()) throw Error(ErrorCode::kEmptySequence, "phase series contains no rows");
  return series;
}

// Serialization ---------------------------------------------------------------

std::string format_real(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::kInvalidArgument, "cannot serialize a non-finite number");
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string serialize(const MaskFrame& mask) {
  std::string out;
  out.reserve(64 + mask.rle.size() * 4);
  out += "{\"frame\":";
  out += std::to_string(mask.frame_index);
  out += ",\"class\":\"";
  out += to_string(mask.class_label);
  out += "\",\"w\":";
  out += std::to_string(mask.width);
  out += ",\"h\":";
  out += std::to_string(mask.height);
  out += ",\"rle\":[";
  for (std::size_t i = 0; i < mask.rle.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(mask.rle[i]);
  }
  out += "]}";
  return out;
}

std::string serialize(const DetectionRecord& det) {
  std::string out = "{\"frame\":" + std::to_string(det.frame_index) + ",\"class\":\"";
  out += to_string(det.class_label);
  out += "\",\"bbox\":[" + format_real(det.bbox.x) + "," + format_real(det.bbox.y) + "," +
         format_real(det.bbox.w) + "," + format_real(det.bbox.h) + "],\"conf\":" + format_real(det.confidence) +
         "}";
  return out;
}

void write_mask_stream(std::ostream& out, std::span<const MaskFrame> frames) {
  for (const MaskFrame& m : frames) out << serialize(m) << '\n';
}

void write_detection_stream(std::ostream& out, std::span<const DetectionRecord> dets) {
  for (const DetectionRecord& d : dets) out << serialize(d) << '\n';
}

void write_phase_series(std::ostream& out, const PhaseProbSeries& series) {
  out << "frame,prob\n";
  for (const PhaseEntry& e : series.entries) out << e.frame_index << ',' << format_real(e.probability) << '\n';
}

}  // namespace iolkin
