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


#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "iolkin/kinematics.hpp"
#include "iolkin/phase.hpp"
#include "iolkin/synth.hpp"

using namespace iolkin;
using namespace iolkin::synth;

namespace {

SynthSpec noisy_spec(std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  s.drift = {{0, 0, 0}, {120, 12, -6}};
  s.orientation = {{0, 10}, {120, 30}, {300, 50}};
  s.phase_noise = 0.05;
  s.detection.center_jitter_px = 0.3;
  s.detection.dropout_rate = 0.1;
  s.detection.spurious_rate = 0.1;
  s.mask.boundary_jitter_px = 0.5;
  s.occlusions = {{200, 220, 45, 20, 8}};
  return s;
}

std::string what_of(const SynthSpec& s) {
  try {
    validate(s);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  const SynthVideo a = generate_video(noisy_spec(5));
  const SynthVideo b = generate_video(noisy_spec(5));
  CHECK(a.masks_jsonl == b.masks_jsonl);
  CHECK(a.detections_jsonl == b.detections_jsonl);
  CHECK(a.phase_csv == b.phase_csv);
  CHECK(truth_to_json(a.truth) == truth_to_json(b.truth));
  const SynthVideo c = generate_video(noisy_spec(6));
  CHECK(a.masks_jsonl != c.masks_jsonl);
}

TEST_CASE("emitted streams parse and start after implantation") {
  const SynthSpec s = noisy_spec(7);
  const SynthVideo v = generate_video(s);
  auto m = iolkin::testing::stream(v.masks_jsonl);
  const MaskSet set = parse_mask_stream(m);
  const FrameIndex start = post_implantation_start(s);
  CHECK(start == 375);
  REQUIRE_FALSE(set.lens.frames.empty());
  CHECK(set.lens.frames.front().frame_index == start);
  CHECK(set.lens.frames.back().frame_index == s.n_frames - 1);
  CHECK(set.pupil.frames.size() == set.lens.frames.size());
  auto d = iolkin::testing::stream(v.detections_jsonl);
  const auto dets = parse_detection_stream(d);
  for (const auto& r : dets) CHECK_NOTHROW(validate(r, std::pair{s.width, s.height}));
  auto p = iolkin::testing::stream(v.phase_csv);
  const auto series = parse_phase_series(p);
  CHECK(series.entries.size() == static_cast<std::size_t>(s.n_frames));
  const auto iv = phase::locate_implantation_interval(phase::classify_clips(series).labels);
  CHECK(iv.first_clip == s.implantation_first_clip);
  CHECK(iv.last_clip == s.implantation_last_clip);
}

TEST_CASE("unfold progress is clamped to the plateau") {
  SynthSpec s;
  CHECK(unfold_progress(s, -3) == 0.0);
  CHECK(unfold_progress(s, 0) == 0.0);
  CHECK(unfold_progress(s, s.unfold_plateau) == 1.0);
  CHECK(unfold_progress(s, s.unfold_plateau + 50) == 1.0);
  double prev = 0.0;
  for (double k = 0; k <= s.unfold_plateau; k += 1) {
    const double u = unfold_progress(s, k);
    CHECK(u >= prev);
    prev = u;
  }
}

TEST_CASE("ground truth of a static unfolded lens") {
  SynthSpec s;
  s.unfold_plateau = 0;
  s.orientation = {{0, 33}};
  const SynthGroundTruth t = ground_truth(s);
  CHECK(t.t_u_frames == 0);
  CHECK(t.instability_literal == 0.0);
  CHECK(t.instability_displacement == 0.0);
  CHECK(t.rotation_deg == 0.0);
  CHECK(t.frames.size() == static_cast<std::size_t>(s.n_frames - post_implantation_start(s)));
}

TEST_CASE("ground truth follows the programmed paths") {
  SynthSpec s;
  s.unfold_plateau = 100;
  s.drift = {{0, 0, 0}, {100, 18, 24}};
  s.orientation = {{0, 0}, {150, 0}, {300, 25}};
  const SynthGroundTruth t = ground_truth(s);
  CHECK(t.plateau_offset == 100);
  // The smoothed area reaches its maximum half a window after the plateau.
  CHECK(t.t_u_frames == 107);
  CHECK(t.rotation_deg == doctest::Approx(25.0).epsilon(1e-9));
  CHECK(t.instability_displacement == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(t.instability_literal == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(t.frames[100].area == doctest::Approx(3.14159265358979 * 40 * 40));
}

TEST_CASE("rasterization against a per-pixel ellipse test") {
  Rng rng(51);
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  for (int i = 0; i < 60; ++i) {
    const Point2 c{rng.uniform(20, 44), rng.uniform(20, 44)};
    const double a = rng.uniform(3, 18), b = rng.uniform(3, 18), ang = rng.uniform(0, 360);
    const auto spans = rasterize_lens(64, 64, c, a, b, ang);
    Bitmap got(64, 64);
    for (const auto& sp : spans)
      for (int x = sp.x_begin; x < sp.x_end; ++x) got.set(x, sp.y);
    int mismatches = 0;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const double dx = x - c.x, dy = y - c.y;
        const double u = dx * std::cos(ang * kDeg) + dy * std::sin(ang * kDeg);
        const double v = -dx * std::sin(ang * kDeg) + dy * std::cos(ang * kDeg);
        const double q = u * u / (a * a) + v * v / (b * b);
        if (std::abs(q - 1.0) < 1e-9) continue;  // boundary round-off either way
        if ((q <= 1.0) != got.at(x, y)) ++mismatches;
      }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("a circle rasterizes the same at every angle") {
  const auto ref = rasterize_lens(80, 80, {40.3, 39.7}, 20, 20, 0);
  for (double ang : {13.0, 90.0, 211.5}) {
    const auto s = rasterize_lens(80, 80, {40.3, 39.7}, 20, 20, ang);
    CHECK(spans_to_rle(s, 80, 80) == spans_to_rle(ref, 80, 80));
  }
}

TEST_CASE("wedges remove pixels near the boundary only") {
  const OcclusionEvent w{0, 10, 0.0, 30.0, 6.0};
  CHECK(in_wedge({69, 40}, {40, 40}, 30, w));
  CHECK_FALSE(in_wedge({50, 40}, {40, 40}, 30, w));
  CHECK_FALSE(in_wedge({69, 60}, {40, 40}, 30, w));
  const auto full = rasterize_lens(80, 80, {40, 40}, 30, 30, 0);
  const auto cut = rasterize_lens(80, 80, {40, 40}, 30, 30, 0, {w});
  CHECK(foreground_count(spans_to_rle(cut, 80, 80)) < foreground_count(spans_to_rle(full, 80, 80)));
  CHECK(ellipse_radius_along(30, 10, 0, 0) == doctest::Approx(30));
  CHECK(ellipse_radius_along(30, 10, 0, 90) == doctest::Approx(10));
  CHECK(ellipse_radius_along(30, 10, 90, 90) == doctest::Approx(30));
}

TEST_CASE("validation names the field") {
  SynthSpec s;
  s.unfold_plateau = 1e6;
  CHECK(what_of(s).find("lens.unfold_plateau") != std::string::npos);
  s = SynthSpec{};
  s.implantation_first_clip = 5;
  CHECK(what_of(s).find("implantation_clips") != std::string::npos);
  s = SynthSpec{};
  s.pupil_center = {10, 10};
  CHECK(what_of(s).find("pupil") != std::string::npos);
  s = SynthSpec{};
  s.detection.dropout_rate = 1.5;
  CHECK_ERROR(validate(s), ErrorCode::kSpecInvalid);
  CHECK_ERROR(generate_video(s), ErrorCode::kSpecInvalid);
  CHECK(what_of(SynthSpec{}).empty());
}

TEST_CASE("spec JSON round trip and strictness") {
  const SynthSpec s = noisy_spec(9);
  const std::string text = spec_to_json(s);
  const SynthSpec back = spec_from_json(text);
  CHECK(spec_to_json(back) == text);
  CHECK(generate_video(back).masks_jsonl == generate_video(s).masks_jsonl);
  CHECK_ERROR(spec_from_json(R"({"seed":1,"colour":"red"})"), ErrorCode::kSpecInvalid);
  CHECK_ERROR(spec_from_json("{"), ErrorCode::kSpecInvalid);
  CHECK_ERROR(spec_from_json(R"({"width":"wide"})"), ErrorCode::kSpecInvalid);
  CHECK(spec_from_json("{}").width == SynthSpec{}.width);
  CHECK(is_study_json(R"({"brands":[]})"));
  CHECK_FALSE(is_study_json(text));
}

TEST_CASE("study specs follow the brand distributions") {
  BrandSpec lo, hi;
  lo.name = "lo";
  lo.rotation_mean_deg = 5;
  hi.name = "hi";
  hi.rotation_mean_deg = 25;
  lo.videos = hi.videos = 20;
  const auto specs = make_study_specs({77, {lo, hi}});
  REQUIRE(specs.size() == 40);
  for (const auto& v : specs)
    CHECK(ground_truth(v.spec).rotation_deg == doctest::Approx(v.programmed_rotation_deg).epsilon(1e-9));

  // A brand mean lands within 2 sigma / sqrt(20) of its target about 95% of
  // the time, so check that rate and the standardized errors over many
  // studies instead of one draw.
  const double se = 3.0 / std::sqrt(20.0);
  int within = 0, total = 0;
  double zsum = 0, zsq = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto study = make_study_specs({seed, {lo, hi}});
    for (const auto* b : {&lo, &hi}) {
      double sum = 0;
      for (const auto& v : study)
        if (v.brand == b->name) sum += v.programmed_rotation_deg;
      const double z = (sum / 20.0 - b->rotation_mean_deg) / se;
      within += std::abs(z) < 2.0;
      zsum += z;
      zsq += z * z;
      ++total;
    }
  }
  const double zmean = zsum / total;
  CHECK(static_cast<double>(within) / total >= 0.9);
  CHECK(std::abs(zmean) < 0.25);
  CHECK(std::abs(zsq / total - zmean * zmean - 1.0) < 0.25);

  CHECK_ERROR(make_study_specs({1, {}}), ErrorCode::kSpecInvalid);
  CHECK_ERROR(make_study_specs({1, {lo, lo}}), ErrorCode::kSpecInvalid);
}

TEST_CASE("study bundle lists every video") {
  BrandSpec a, b;
  a.name = "a";
  b.name = "b";
  a.videos = 2;
  b.videos = 3;
  const StudyBundle bundle = generate_study({3, {a, b}});
  CHECK(bundle.videos.size() == 5);
  CHECK(bundle.manifest_json.find("b/v002") != std::string::npos);
  const auto dir = std::filesystem::temp_directory_path() / "iolkin_test_synth_study";
  std::filesystem::remove_all(dir);
  write_study(bundle, dir);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "a" / "v001" / "masks.jsonl"));
  CHECK(std::filesystem::exists(dir / "b" / "v002" / "truth.json"));
  std::filesystem::remove_all(dir);
}
