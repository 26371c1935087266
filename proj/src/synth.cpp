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

#include "iolkin/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "iolkin/error.hpp"
#include "iolkin/kinematics.hpp"
#include "iolkin/phase.hpp"
#include "iolkin/random.hpp"

namespace iolkin::synth {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kSpecInvalid, field + ": " + why);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <typename W, typename F>
auto piecewise_linear(const std::vector<W>& pts, double k, F value) {
  using V = decltype(value(pts.front()));
  if (k <= pts.front().frame) return value(pts.front());
  if (k >= pts.back().frame) return value(pts.back());
  auto it = std::upper_bound(pts.begin(), pts.end(), k, [](double f, const W& w) { return f < w.frame; });
  const W& b = *it;
  const W& a = *std::prev(it);
  const double t = (k - a.frame) / (b.frame - a.frame);
  return V(value(a) + t * (value(b) - value(a)));
}

Point2 drift_at(const SynthSpec& s, double k) {
  if (s.drift.empty()) return {0.0, 0.0};
  return piecewise_linear(s.drift, k, [](const DriftWaypoint& w) { return Point2{w.dx, w.dy}; });
}

double orientation_at(const SynthSpec& s, double k) {
  if (s.orientation.empty()) return 0.0;
  return piecewise_linear(s.orientation, k, [](const AngleWaypoint& w) { return w.deg; });
}

double wrap360(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

BBox box_around(Point2 c, double w, double h) { return {c.x - 0.5 * w, c.y - 0.5 * h, w, h}; }

// Streams of independent variates so that noise settings of one stream never
// shift another.
struct Streams {
  Rng phase;
  Rng mask;
  Rng detection;
  explicit Streams(std::uint64_t seed) : phase(0), mask(0), detection(0) {
    Rng root(seed);
    phase = Rng(root.split());
    mask = Rng(root.split());
    detection = Rng(root.split());
  }
};

}  // namespace

FrameIndex post_implantation_start(const SynthSpec& spec) {
  return static_cast<FrameIndex>(spec.implantation_last_clip + 1) * phase::kClipFrames;
}

double unfold_progress(const SynthSpec& spec, double k) {
  if (k >= spec.unfold_plateau) return 1.0;
  if (k <= 0.0) return 0.0;
  const double s0 = logistic(-spec.unfold_steepness * spec.unfold_midpoint);
  const double s1 = logistic(spec.unfold_steepness * (spec.unfold_plateau - spec.unfold_midpoint));
  const double sk = logistic(spec.unfold_steepness * (k - spec.unfold_midpoint));
  return std::clamp((sk - s0) / (s1 - s0), 0.0, 1.0);
}

double ellipse_radius_along(double semi_major, double semi_minor, double axis_deg, double direction_deg) {
  const double phi = (direction_deg - axis_deg) * kDegToRad;
  const double c = std::cos(phi) / semi_major;
  const double s = std::sin(phi) / semi_minor;
  return 1.0 / std::sqrt(c * c + s * s);
}

bool in_wedge(Point2 p, Point2 lens_center, double boundary_distance, const OcclusionEvent& event) {
  const Point2 u{std::cos(event.direction_deg * kDegToRad), std::sin(event.direction_deg * kDegToRad)};
  const Point2 tip = lens_center + (boundary_distance - event.depth_px) * u;
  const Point2 w = p - tip;
  const double along = w.x * u.x + w.y * u.y;
  return along >= w.norm() * std::cos(0.5 * event.opening_deg * kDegToRad);
}

std::vector<RowSpan> rasterize_lens(int width, int height, Point2 center, double semi_major, double semi_minor,
                                    double angle_deg, const std::vector<OcclusionEvent>& wedges) {
  std::vector<RowSpan> spans;
  if (!(semi_major > 0.0) || !(semi_minor > 0.0)) return spans;
  const double ca = std::cos(angle_deg * kDegToRad);
  const double sa = std::sin(angle_deg * kDegToRad);
  // A circle must not depend on the angle, so skip the rotation round-off.
  const bool circle = semi_major == semi_minor;
  const double reach = std::max(semi_major, semi_minor);
  const int y0 = std::max(0, static_cast<int>(std::floor(center.y - reach)));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(center.y + reach)));
  const int x0 = std::max(0, static_cast<int>(std::floor(center.x - reach)));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(center.x + reach)));

  std::vector<double> wedge_reach;
  for (const auto& w : wedges)
    wedge_reach.push_back(ellipse_radius_along(semi_major, semi_minor, angle_deg, w.direction_deg));

  for (int y = y0; y <= y1; ++y) {
    int run_start = -1;
    for (int x = x0; x <= x1 + 1; ++x) {
      bool inside = false;
      if (x <= x1) {
        const double dx = x - center.x;
        const double dy = y - center.y;
        if (circle) {
          inside = dx * dx + dy * dy <= semi_major * semi_major;
        } else {
          const double u = (dx * ca + dy * sa) / semi_major;
          const double v = (-dx * sa + dy * ca) / semi_minor;
          inside = u * u + v * v <= 1.0;
        }
        for (std::size_t i = 0; inside && i < wedges.size(); ++i)
          if (in_wedge({double(x), double(y)}, center, wedge_reach[i], wedges[i])) inside = false;
      }
      if (inside && run_start < 0) run_start = x;
      if (!inside && run_start >= 0) {
        spans.push_back({y, run_start, x});
        run_start = -1;
      }
    }
  }
  return spans;
}

void validate(const SynthSpec& s) {
  if (s.width <= 0) invalid("width", "must be positive");
  if (s.height <= 0) invalid("height", "must be positive");
  if (s.implantation_last_clip < s.implantation_first_clip)
    invalid("implantation_clips", "last clip precedes first clip");
  const FrameIndex start = post_implantation_start(s);
  if (s.n_frames < start + 16) invalid("n_frames", "post-implantation phase needs at least 16 frames");
  const auto n_post = static_cast<double>(s.n_frames - start);
  for (double p : {s.phase_prob_in, s.phase_prob_out})
    if (!(p >= 0.0 && p <= 1.0)) invalid("phase_prob", "must lie in [0,1]");
  if (!(s.phase_prob_in > s.phase_prob_out)) invalid("phase_prob_in", "must exceed phase_prob_out");
  if (!(s.phase_noise >= 0.0)) invalid("phase_noise", "must be non-negative");
  if (!(s.pupil_radius > 0.0)) invalid("pupil.radius", "must be positive");
  if (s.pupil_center.x - s.pupil_radius < 0.0 || s.pupil_center.y - s.pupil_radius < 0.0 ||
      s.pupil_center.x + s.pupil_radius > s.width - 1 || s.pupil_center.y + s.pupil_radius > s.height - 1)
    invalid("pupil", "disk leaves the frame");
  if (!(s.semi_major > 0.0) || !(s.semi_minor > 0.0)) invalid("lens.semi_axes", "must be positive");
  if (!(s.folded_major_scale > 0.0 && s.folded_major_scale <= 1.0))
    invalid("lens.folded_major_scale", "must lie in (0,1]");
  if (!(s.folded_minor_scale > 0.0 && s.folded_minor_scale <= 1.0))
    invalid("lens.folded_minor_scale", "must lie in (0,1]");
  if (!(s.unfold_steepness > 0.0)) invalid("lens.unfold_steepness", "must be positive");
  if (!(s.unfold_plateau >= 0.0)) invalid("lens.unfold_plateau", "must be non-negative");
  if (!(s.unfold_plateau < n_post - 1.0)) invalid("lens.unfold_plateau", "plateau must be reached before n_frames");
  if (!(s.hook_offset >= 0.0)) invalid("lens.hook_offset", "must be non-negative");
  if (!(s.hook_box > 0.0)) invalid("lens.hook_box", "must be positive");
  for (std::size_t i = 1; i < s.drift.size(); ++i)
    if (!(s.drift[i].frame > s.drift[i - 1].frame)) invalid("lens.drift", "waypoint frames must increase");
  for (std::size_t i = 1; i < s.orientation.size(); ++i)
    if (!(s.orientation[i].frame > s.orientation[i - 1].frame))
      invalid("lens.orientation", "waypoint frames must increase");

  // Lens, hooks and boxes stay inside the frame; drift is piecewise linear, so
  // checking the waypoints and the origin covers the whole path.
  const double reach = std::max(s.semi_major, s.semi_minor) + s.hook_offset + 0.5 * s.hook_box +
                       4.0 * s.detection.center_jitter_px + s.detection.duplicate_radius_px + 2.0;
  std::vector<Point2> positions{drift_at(s, 0.0)};
  for (const auto& w : s.drift) positions.push_back({w.dx, w.dy});
  for (Point2 d : positions) {
    const Point2 c = s.pupil_center + d;
    if (c.x - reach < 0.0 || c.y - reach < 0.0 || c.x + reach > s.width || c.y + reach > s.height)
      invalid("lens.drift", "lens or hooks leave the frame");
  }
  for (const auto& o : s.occlusions) {
    if (o.end <= o.start) invalid("occlusions", "end must follow start");
    if (!(o.opening_deg > 0.0 && o.opening_deg < 180.0)) invalid("occlusions.opening_deg", "must lie in (0,180)");
    if (!(o.depth_px > 0.0)) invalid("occlusions.depth_px", "must be positive");
  }
  const DetectionNoise& d = s.detection;
  for (double r : {d.dropout_rate, d.low_conf_rate, d.spurious_rate, d.duplicate_fraction})
    if (!(r >= 0.0 && r <= 1.0)) invalid("detection", "rates must lie in [0,1]");
  if (!(d.center_jitter_px >= 0.0)) invalid("detection.center_jitter_px", "must be non-negative");
  if (!(d.hook_conf_min > 0.0 && d.hook_conf_min <= d.hook_conf_max && d.hook_conf_max <= 1.0))
    invalid("detection.hook_conf", "need 0 < min <= max <= 1");
  if (!(d.spurious_conf_min >= 0.0 && d.spurious_conf_min <= d.spurious_conf_max && d.spurious_conf_max <= 1.0))
    invalid("detection.spurious_conf", "need 0 <= min <= max <= 1");
  if (!(d.lens_conf >= 0.0 && d.lens_conf <= 1.0)) invalid("detection.lens_conf", "must lie in [0,1]");
  if (!(d.duplicate_conf_ratio_min > 0.0 && d.duplicate_conf_ratio_min <= d.duplicate_conf_ratio_max &&
        d.duplicate_conf_ratio_max <= 1.0))
    invalid("detection.duplicate_conf_ratio", "need 0 < min <= max <= 1");
  if (!(d.duplicate_radius_px >= 0.0)) invalid("detection.duplicate_radius_px", "must be non-negative");
  if (!(s.mask.boundary_jitter_px >= 0.0)) invalid("mask.boundary_jitter_px", "must be non-negative");
}

SynthGroundTruth ground_truth(const SynthSpec& spec) {
  validate(spec);
  SynthGroundTruth t;
  t.post_implantation_start_frame = post_implantation_start(spec);
  t.plateau_offset = static_cast<FrameIndex>(std::ceil(spec.unfold_plateau));
  const FrameIndex n_post = spec.n_frames - t.post_implantation_start_frame;
  t.frames.reserve(static_cast<std::size_t>(n_post));
  std::vector<double> areas;
  std::vector<Point2> rel;
  std::vector<hookpose::OrientationSample> orient;
  for (FrameIndex k = 0; k < n_post; ++k) {
    const double kd = static_cast<double>(k);
    const double u = unfold_progress(spec, kd);
    FrameTruth f;
    f.frame_index = t.post_implantation_start_frame + k;
    f.rel_pos = drift_at(spec, kd);
    f.lens_center = spec.pupil_center + f.rel_pos;
    f.semi_major = spec.semi_major * (spec.folded_major_scale + (1.0 - spec.folded_major_scale) * u);
    f.semi_minor = spec.semi_minor * (spec.folded_minor_scale + (1.0 - spec.folded_minor_scale) * u);
    f.area = std::numbers::pi * f.semi_major * f.semi_minor;
    f.orientation_deg = wrap360(orientation_at(spec, kd));
    areas.push_back(f.area);
    rel.push_back(f.rel_pos);
    orient.push_back({f.frame_index, f.orientation_deg, hookpose::OrientationSource::kTwoHooks});
    t.frames.push_back(f);
  }
  t.t_u_frames = static_cast<FrameIndex>(kinematics::unfolding_time(kinematics::smooth_area(areas)));
  t.instability_literal = kinematics::instability(rel, kinematics::InstabilityMode::kLiteral);
  t.instability_displacement = kinematics::instability(rel, kinematics::InstabilityMode::kDisplacement);
  t.rotation_deg = kinematics::rotation(orient, t.post_implantation_start_frame + t.t_u_frames);
  return t;
}

SynthVideo generate_video(const SynthSpec& spec) {
  SynthVideo out;
  out.truth = ground_truth(spec);
  Streams rng(spec.seed);
  const FrameIndex start = out.truth.post_implantation_start_frame;

  // Phase probabilities for the whole video.
  {
    PhaseProbSeries series;
    series.entries.reserve(static_cast<std::size_t>(spec.n_frames));
    for (FrameIndex f = 0; f < spec.n_frames; ++f) {
      const auto clip = static_cast<std::size_t>(f / phase::kClipFrames);
      const bool in = clip >= spec.implantation_first_clip && clip <= spec.implantation_last_clip;
      double p = in ? spec.phase_prob_in : spec.phase_prob_out;
      if (spec.phase_noise > 0.0) p += rng.phase.normal(0.0, spec.phase_noise);
      series.entries.push_back({f, std::clamp(round_to(p, 1e-4), 0.0, 1.0)});
    }
    std::ostringstream os;
    write_phase_series(os, series);
    out.phase_csv = os.str();
  }

  const std::vector<RowSpan> pupil_spans =
      rasterize_lens(spec.width, spec.height, spec.pupil_center, spec.pupil_radius, spec.pupil_radius, 0.0);
  const std::vector<std::uint32_t> pupil_rle = spans_to_rle(pupil_spans, spec.width, spec.height);

  std::ostringstream masks;
  std::ostringstream dets;
  const DetectionNoise& dn = spec.detection;
  auto jitter = [&](Point2 c) {
    if (dn.center_jitter_px <= 0.0) return c;
    const double jx = rng.detection.normal(0.0, dn.center_jitter_px);
    const double jy = rng.detection.normal(0.0, dn.center_jitter_px);
    return Point2{c.x + jx, c.y + jy};
  };

  for (const FrameTruth& f : out.truth.frames) {
    const FrameIndex k = f.frame_index - start;
    double a = f.semi_major;
    double b = f.semi_minor;
    const double sigma = spec.mask.boundary_jitter_px *
                         (spec.mask.jitter_after_unfold ? 1.0 : 1.0 - unfold_progress(spec, static_cast<double>(k)));
    if (sigma > 0.0) {
      a = std::max(0.5, a + rng.mask.normal(0.0, sigma));
      b = std::max(0.5, b + rng.mask.normal(0.0, sigma));
    }
    std::vector<OcclusionEvent> active;
    for (const auto& o : spec.occlusions)
      if (k >= o.start && k < o.end) active.push_back(o);
    const auto lens_spans = rasterize_lens(spec.width, spec.height, f.lens_center, a, b, f.orientation_deg, active);
    masks << serialize(MaskFrame{f.frame_index, MaskClass::kLens, spec.width, spec.height,
                                 spans_to_rle(lens_spans, spec.width, spec.height)})
          << '\n';
    masks << serialize(MaskFrame{f.frame_index, MaskClass::kPupil, spec.width, spec.height, pupil_rle}) << '\n';

    // Lens box: axis-aligned extent of the rotated ellipse.
    const double th = f.orientation_deg * kDegToRad;
    const double hx = std::sqrt(std::pow(f.semi_major * std::cos(th), 2) + std::pow(f.semi_minor * std::sin(th), 2));
    const double hy = std::sqrt(std::pow(f.semi_major * std::sin(th), 2) + std::pow(f.semi_minor * std::cos(th), 2));
    const Point2 lc = jitter(f.lens_center);
    dets << serialize(DetectionRecord{f.frame_index, DetClass::kLens, box_around(lc, 2.0 * hx, 2.0 * hy), dn.lens_conf})
         << '\n';

    const Point2 axis{std::cos(th), std::sin(th)};
    const double arm = f.semi_major + spec.hook_offset;
    const std::array<Point2, 2> hooks{f.lens_center + arm * axis, f.lens_center - arm * axis};
    std::vector<DetectionRecord> emitted;
    for (const Point2& h : hooks) {
      const bool dropped = rng.detection.bernoulli(dn.dropout_rate);
      const bool low = rng.detection.bernoulli(dn.low_conf_rate);
      const double conf = low ? rng.detection.uniform(0.3, 0.6) : rng.detection.uniform(dn.hook_conf_min, dn.hook_conf_max);
      const Point2 c = jitter(h);
      if (dropped) continue;
      emitted.push_back({f.frame_index, DetClass::kHook, box_around(c, spec.hook_box, spec.hook_box), round_to(conf, 1e-4)});
    }
    if (rng.detection.bernoulli(dn.spurious_rate)) {
      const bool duplicate = rng.detection.bernoulli(dn.duplicate_fraction);
      const double ang = rng.detection.uniform(0.0, 2.0 * std::numbers::pi);
      const double u = rng.detection.uniform();
      const double conf_u = rng.detection.uniform();
      if (duplicate && !emitted.empty()) {
        const DetectionRecord& anchor = emitted[rng.detection.index(emitted.size())];
        const Point2 c = anchor.bbox.center() + (u * dn.duplicate_radius_px) * Point2{std::cos(ang), std::sin(ang)};
        const double ratio = dn.duplicate_conf_ratio_min + (dn.duplicate_conf_ratio_max - dn.duplicate_conf_ratio_min) * conf_u;
        emitted.push_back({f.frame_index, DetClass::kHook, box_around(c, spec.hook_box, spec.hook_box),
                           round_to(anchor.confidence * ratio, 1e-4)});
      } else if (!duplicate) {
        const Point2 c = f.lens_center + ((0.3 + 0.7 * u) * arm) * Point2{std::cos(ang), std::sin(ang)};
        const double conf = dn.spurious_conf_min + (dn.spurious_conf_max - dn.spurious_conf_min) * conf_u;
        emitted.push_back({f.frame_index, DetClass::kHook, box_around(c, spec.hook_box, spec.hook_box), round_to(conf, 1e-4)});
      }
    }
    for (const auto& d : emitted) dets << serialize(d) << '\n';
  }
  out.masks_jsonl = masks.str();
  out.detections_jsonl = dets.str();
  return out;
}

// Studies ---------------------------------------------------------------------

std::vector<StudyVideoSpec> make_study_specs(const StudySpec& study) {
  if (study.brands.empty()) invalid("brands", "study needs at least one brand");
  std::set<std::string> names;
  for (const auto& b : study.brands) {
    if (b.name.empty()) invalid("brands.name", "must be non-empty");
    if (!names.insert(b.name).second) invalid("brands.name", "duplicate brand \"" + b.name + "\"");
    if (b.videos == 0) invalid("brands.videos", "must be positive");
    if (!(b.rotation_sd_deg >= 0.0 && b.unfold_sd_s >= 0.0 && b.drift_sd_px >= 0.0))
      invalid("brands", "standard deviations must be non-negative");
  }

  Rng root(study.seed);
  std::vector<StudyVideoSpec> out;
  for (const auto& brand : study.brands) {
    for (std::size_t v = 0; v < brand.videos; ++v) {
      StudyVideoSpec sv;
      sv.brand = brand.name;
      sv.index = v;
      SynthSpec s = brand.base;
      s.seed = root.split();
      Rng r(s.seed ^ 0xD1B54A32D192ED03ULL);

      const FrameIndex n_post = s.n_frames - post_implantation_start(s);
      const double max_plateau = static_cast<double>(n_post) - 150.0;
      if (max_plateau < 20.0) invalid("brands.base.n_frames", "post-implantation phase too short for a study video");
      const double plateau =
          std::clamp(std::round(r.normal(brand.unfold_mean_s, brand.unfold_sd_s) * kFramesPerSecond), 20.0, max_plateau);
      const double rotation = std::max(0.0, r.normal(brand.rotation_mean_deg, brand.rotation_sd_deg));
      const double path = std::max(0.0, r.normal(brand.drift_mean_px, brand.drift_sd_px));
      s.unfold_plateau = plateau;
      s.unfold_midpoint = 0.55 * plateau;
      s.unfold_steepness = 8.0 / plateau;

      // Drift during unfolding only: three equal segments of a random zigzag
      // that keeps the lens within 10 px of the pupil centre.
      s.drift.clear();
      const double start_ang = r.uniform(0.0, 2.0 * std::numbers::pi);
      Point2 p = r.uniform(0.0, 4.0) * Point2{std::cos(start_ang), std::sin(start_ang)};
      s.drift.push_back({0.0, p.x, p.y});
      for (int seg = 1; seg <= 3; ++seg) {
        double ang = r.uniform(0.0, 2.0 * std::numbers::pi);
        Point2 step = (path / 3.0) * Point2{std::cos(ang), std::sin(ang)};
        if ((p + step).norm() > 10.0) {
          const double home = std::atan2(-p.y, -p.x) + r.uniform(-0.5, 0.5);
          step = std::min(path / 3.0, 10.0 + p.norm()) * Point2{std::cos(home), std::sin(home)};
        }
        p = p + step;
        s.drift.push_back({plateau * seg / 3.0, p.x, p.y});
      }

      // Twist while unfolding, rest, then dial by the programmed rotation.
      const double theta0 = r.uniform(0.0, 180.0);
      const double twist = r.uniform(-20.0, 20.0);
      const double sign = r.bernoulli(0.5) ? 1.0 : -1.0;
      const double dial_end = static_cast<double>(n_post) - 20.0;
      s.orientation = {{0.0, theta0},
                       {plateau, theta0 + twist},
                       {plateau + 20.0, theta0 + twist},
                       {dial_end, theta0 + twist + sign * rotation}};
      sv.spec = std::move(s);
      sv.programmed_rotation_deg = rotation;
      out.push_back(std::move(sv));
    }
  }
  return out;
}

StudyBundle generate_study(const StudySpec& study) {
  const auto specs = make_study_specs(study);
  StudyBundle bundle;
  nlohmann::ordered_json manifest;
  manifest["brands"] = nlohmann::ordered_json::array();
  std::string current;
  for (const auto& sv : specs) {
    StudyVideo v;
    v.brand = sv.brand;
    v.index = sv.index;
    char idx[16];
    std::snprintf(idx, sizeof idx, "v%03zu", sv.index);
    v.directory = sv.brand + "/" + idx;
    v.video = generate_video(sv.spec);
    if (sv.brand != current) {
      manifest["brands"].push_back({{"name", sv.brand}, {"videos", nlohmann::ordered_json::array()}});
      current = sv.brand;
    }
    manifest["brands"].back()["videos"].push_back({{"masks", v.directory + "/masks.jsonl"},
                                                   {"detections", v.directory + "/detections.jsonl"},
                                                   {"phase", v.directory + "/phase.csv"},
                                                   {"truth", v.directory + "/truth.json"}});
    bundle.videos.push_back(std::move(v));
  }
  bundle.manifest_json = manifest.dump(2) + "\n";
  return bundle;
}

// JSON ------------------------------------------------------------------------

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) invalid(where, "must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) invalid(where + "." + it.key(), "unknown key");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    invalid(where + "." + key, "has the wrong type");
  }
}

Point2 read_point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    invalid(where, "must be [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

SynthSpec spec_from(const json& j, const std::string& where) {
  SynthSpec s;
  check_keys(j,
             {"seed", "width", "height", "n_frames", "implantation_clips", "phase_prob_in", "phase_prob_out",
              "phase_noise", "pupil", "lens", "occlusions", "detection_noise", "mask_noise"},
             where);
  read(j, "seed", s.seed, where);
  read(j, "width", s.width, where);
  read(j, "height", s.height, where);
  read(j, "n_frames", s.n_frames, where);
  if (auto it = j.find("implantation_clips"); it != j.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_unsigned() || !(*it)[1].is_number_unsigned())
      invalid(where + ".implantation_clips", "must be [first, last]");
    s.implantation_first_clip = (*it)[0].get<std::size_t>();
    s.implantation_last_clip = (*it)[1].get<std::size_t>();
  }
  read(j, "phase_prob_in", s.phase_prob_in, where);
  read(j, "phase_prob_out", s.phase_prob_out, where);
  read(j, "phase_noise", s.phase_noise, where);
  if (auto it = j.find("pupil"); it != j.end()) {
    check_keys(*it, {"center", "radius"}, where + ".pupil");
    if (it->contains("center")) s.pupil_center = read_point((*it)["center"], where + ".pupil.center");
    read(*it, "radius", s.pupil_radius, where + ".pupil");
  }
  if (auto it = j.find("lens"); it != j.end()) {
    const json& l = *it;
    const std::string lw = where + ".lens";
    check_keys(l,
               {"semi_axes", "folded_major_scale", "folded_minor_scale", "unfold_midpoint", "unfold_steepness",
                "unfold_plateau", "drift", "orientation", "hook_offset", "hook_box"},
               lw);
    if (l.contains("semi_axes")) {
      const Point2 ax = read_point(l["semi_axes"], lw + ".semi_axes");
      s.semi_major = ax.x;
      s.semi_minor = ax.y;
    }
    read(l, "folded_major_scale", s.folded_major_scale, lw);
    read(l, "folded_minor_scale", s.folded_minor_scale, lw);
    read(l, "unfold_midpoint", s.unfold_midpoint, lw);
    read(l, "unfold_steepness", s.unfold_steepness, lw);
    read(l, "unfold_plateau", s.unfold_plateau, lw);
    read(l, "hook_offset", s.hook_offset, lw);
    read(l, "hook_box", s.hook_box, lw);
    if (l.contains("drift")) {
      if (!l["drift"].is_array()) invalid(lw + ".drift", "must be a list of [frame, dx, dy]");
      for (const json& w : l["drift"]) {
        if (!w.is_array() || w.size() != 3) invalid(lw + ".drift", "must be a list of [frame, dx, dy]");
        s.drift.push_back({w[0].get<double>(), w[1].get<double>(), w[2].get<double>()});
      }
    }
    if (l.contains("orientation")) {
      if (!l["orientation"].is_array()) invalid(lw + ".orientation", "must be a list of [frame, deg]");
      for (const json& w : l["orientation"]) {
        if (!w.is_array() || w.size() != 2) invalid(lw + ".orientation", "must be a list of [frame, deg]");
        s.orientation.push_back({w[0].get<double>(), w[1].get<double>()});
      }
    }
  }
  if (auto it = j.find("occlusions"); it != j.end()) {
    if (!it->is_array()) invalid(where + ".occlusions", "must be a list");
    for (const json& o : *it) {
      check_keys(o, {"start", "end", "direction_deg", "opening_deg", "depth_px"}, where + ".occlusions");
      OcclusionEvent e;
      read(o, "start", e.start, where + ".occlusions");
      read(o, "end", e.end, where + ".occlusions");
      read(o, "direction_deg", e.direction_deg, where + ".occlusions");
      read(o, "opening_deg", e.opening_deg, where + ".occlusions");
      read(o, "depth_px", e.depth_px, where + ".occlusions");
      s.occlusions.push_back(e);
    }
  }
  if (auto it = j.find("detection_noise"); it != j.end()) {
    const std::string dw = where + ".detection_noise";
    check_keys(*it,
               {"center_jitter_px", "lens_conf", "hook_conf_min", "hook_conf_max", "dropout_rate", "low_conf_rate",
                "spurious_rate", "duplicate_fraction", "duplicate_radius_px", "duplicate_conf_ratio_min",
                "duplicate_conf_ratio_max", "spurious_conf_min", "spurious_conf_max"},
               dw);
    DetectionNoise& d = s.detection;
    read(*it, "center_jitter_px", d.center_jitter_px, dw);
    read(*it, "lens_conf", d.lens_conf, dw);
    read(*it, "hook_conf_min", d.hook_conf_min, dw);
    read(*it, "hook_conf_max", d.hook_conf_max, dw);
    read(*it, "dropout_rate", d.dropout_rate, dw);
    read(*it, "low_conf_rate", d.low_conf_rate, dw);
    read(*it, "spurious_rate", d.spurious_rate, dw);
    read(*it, "duplicate_fraction", d.duplicate_fraction, dw);
    read(*it, "duplicate_radius_px", d.duplicate_radius_px, dw);
    read(*it, "duplicate_conf_ratio_min", d.duplicate_conf_ratio_min, dw);
    read(*it, "duplicate_conf_ratio_max", d.duplicate_conf_ratio_max, dw);
    read(*it, "spurious_conf_min", d.spurious_conf_min, dw);
    read(*it, "spurious_conf_max", d.spurious_conf_max, dw);
  }
  if (auto it = j.find("mask_noise"); it != j.end()) {
    check_keys(*it, {"boundary_jitter_px", "jitter_after_unfold"}, where + ".mask_noise");
    read(*it, "boundary_jitter_px", s.mask.boundary_jitter_px, where + ".mask_noise");
    read(*it, "jitter_after_unfold", s.mask.jitter_after_unfold, where + ".mask_noise");
  }
  return s;
}

json spec_to(const SynthSpec& s) {
  json j;
  j["seed"] = s.seed;
  j["width"] = s.width;
  j["height"] = s.height;
  j["n_frames"] = s.n_frames;
  j["implantation_clips"] = {s.implantation_first_clip, s.implantation_last_clip};
  j["phase_prob_in"] = s.phase_prob_in;
  j["phase_prob_out"] = s.phase_prob_out;
  j["phase_noise"] = s.phase_noise;
  j["pupil"] = {{"center", {s.pupil_center.x, s.pupil_center.y}}, {"radius", s.pupil_radius}};
  json drift = json::array();
  for (const auto& w : s.drift) drift.push_back({w.frame, w.dx, w.dy});
  json orient = json::array();
  for (const auto& w : s.orientation) orient.push_back({w.frame, w.deg});
  j["lens"] = {{"semi_axes", {s.semi_major, s.semi_minor}},
               {"folded_major_scale", s.folded_major_scale},
               {"folded_minor_scale", s.folded_minor_scale},
               {"unfold_midpoint", s.unfold_midpoint},
               {"unfold_steepness", s.unfold_steepness},
               {"unfold_plateau", s.unfold_plateau},
               {"drift", drift},
               {"orientation", orient},
               {"hook_offset", s.hook_offset},
               {"hook_box", s.hook_box}};
  json occ = json::array();
  for (const auto& o : s.occlusions)
    occ.push_back({{"start", o.start},
                   {"end", o.end},
                   {"direction_deg", o.direction_deg},
                   {"opening_deg", o.opening_deg},
                   {"depth_px", o.depth_px}});
  j["occlusions"] = occ;
  const DetectionNoise& d = s.detection;
  j["detection_noise"] = {{"center_jitter_px", d.center_jitter_px}, {"lens_conf", d.lens_conf},
                          {"hook_conf_min", d.hook_conf_min},       {"hook_conf_max", d.hook_conf_max},
                          {"dropout_rate", d.dropout_rate},         {"low_conf_rate", d.low_conf_rate},
                          {"spurious_rate", d.spurious_rate},       {"duplicate_fraction", d.duplicate_fraction},
                          {"duplicate_radius_px", d.duplicate_radius_px},
                          {"duplicate_conf_ratio_min", d.duplicate_conf_ratio_min},
                          {"duplicate_conf_ratio_max", d.duplicate_conf_ratio_max},
                          {"spurious_conf_min", d.spurious_conf_min},
                          {"spurious_conf_max", d.spurious_conf_max}};
  j["mask_noise"] = {{"boundary_jitter_px", s.mask.boundary_jitter_px},
                     {"jitter_after_unfold", s.mask.jitter_after_unfold}};
  return j;
}

json parse_document(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) invalid("document", "malformed JSON");
  return j;
}

}  // namespace

SynthSpec spec_from_json(const std::string& text) {
  SynthSpec s = spec_from(parse_document(text), "spec");
  validate(s);
  return s;
}

std::string spec_to_json(const SynthSpec& spec) { return spec_to(spec).dump(2) + "\n"; }

bool is_study_json(const std::string& text) {
  const json j = parse_document(text);
  return j.is_object() && j.contains("brands");
}

StudySpec study_from_json(const std::string& text) {
  const json j = parse_document(text);
  check_keys(j, {"seed", "brands"}, "study");
  StudySpec st;
  read(j, "seed", st.seed, "study");
  if (!j.contains("brands") || !j["brands"].is_array()) invalid("study.brands", "must be a list");
  for (const json& b : j["brands"]) {
    check_keys(b,
               {"name", "videos", "base", "rotation_mean_deg", "rotation_sd_deg", "unfold_mean_s", "unfold_sd_s",
                "drift_mean_px", "drift_sd_px"},
               "study.brands");
    BrandSpec bs;
    read(b, "name", bs.name, "study.brands");
    read(b, "videos", bs.videos, "study.brands");
    if (b.contains("base")) bs.base = spec_from(b["base"], "study.brands.base");
    read(b, "rotation_mean_deg", bs.rotation_mean_deg, "study.brands");
    read(b, "rotation_sd_deg", bs.rotation_sd_deg, "study.brands");
    read(b, "unfold_mean_s", bs.unfold_mean_s, "study.brands");
    read(b, "unfold_sd_s", bs.unfold_sd_s, "study.brands");
    read(b, "drift_mean_px", bs.drift_mean_px, "study.brands");
    read(b, "drift_sd_px", bs.drift_sd_px, "study.brands");
    st.brands.push_back(std::move(bs));
  }
  return st;
}

std::string truth_to_json(const SynthGroundTruth& t) {
  nlohmann::ordered_json j;
  j["post_implantation_start_frame"] = t.post_implantation_start_frame;
  j["plateau_offset"] = t.plateau_offset;
  j["t_u_frames"] = t.t_u_frames;
  j["t_u_seconds"] = static_cast<double>(t.t_u_frames) / kFramesPerSecond;
  j["instability_literal"] = t.instability_literal;
  j["instability_displacement"] = t.instability_displacement;
  j["rotation_deg"] = t.rotation_deg;
  auto frames = nlohmann::ordered_json::array();
  for (const auto& f : t.frames)
    frames.push_back({{"frame", f.frame_index},
                      {"center", {f.lens_center.x, f.lens_center.y}},
                      {"area", f.area},
                      {"orientation_deg", f.orientation_deg}});
  j["frames"] = frames;
  return j.dump() + "\n";
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  os << text;
  if (!os) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

}  // namespace

void write_video(const SynthVideo& video, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "masks.jsonl", video.masks_jsonl);
  write_text(dir / "detections.jsonl", video.detections_jsonl);
  write_text(dir / "phase.csv", video.phase_csv);
  write_text(dir / "truth.json", truth_to_json(video.truth));
}

void write_study(const StudyBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& v : bundle.videos) write_video(v.video, dir / v.directory);
  write_text(dir / "manifest.json", bundle.manifest_json);
}

}  // namespace iolkin::synth
