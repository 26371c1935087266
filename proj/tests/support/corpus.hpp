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

// Seeded synthetic-video corpora shared by unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "iolkin/random.hpp"
#include "iolkin/synth.hpp"

namespace iolkin::testing {

/// Fraction of a continuous ellipse covered by a wedge: the area swept by
/// rays from the wedge tip to the boundary, integrated over the opening with
/// Simpson's rule.
inline double wedge_area_fraction(double a, double b, double axis_deg, const synth::OcclusionEvent& e) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const double boundary = synth::ellipse_radius_along(a, b, axis_deg, e.direction_deg);
  const double t = boundary - e.depth_px;
  const double ca = std::cos(axis_deg * kDeg);
  const double sa = std::sin(axis_deg * kDeg);
  // Tip in the ellipse frame.
  const double dir = e.direction_deg * kDeg;
  const double tx = t * (std::cos(dir) * ca + std::sin(dir) * sa);
  const double ty = t * (-std::cos(dir) * sa + std::sin(dir) * ca);
  auto reach = [&](double phi) {
    const double dx = std::cos(phi) * ca + std::sin(phi) * sa;
    const double dy = -std::cos(phi) * sa + std::sin(phi) * ca;
    const double qa = dx * dx / (a * a) + dy * dy / (b * b);
    const double qb = 2.0 * (tx * dx / (a * a) + ty * dy / (b * b));
    const double qc = tx * tx / (a * a) + ty * ty / (b * b) - 1.0;
    return (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
  };
  const int steps = 2000;
  const double half = 0.5 * e.opening_deg * kDeg;
  const double h = 2.0 * half / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double phi = dir - half + i * h;
    const double s = reach(phi);
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * 0.5 * s * s;
  }
  return (sum * h / 3.0) / (3.14159265358979323846 * a * b);
}

/// Wedge depth whose covered fraction of the ellipse is `fraction`. The
/// fraction grows monotonically with depth.
inline double wedge_depth_for_fraction(double a, double b, double axis_deg, synth::OcclusionEvent e,
                                       double fraction) {
  // The tip may pass the centre; it must stay short of the far boundary.
  double lo = 0.0;
  double hi = synth::ellipse_radius_along(a, b, axis_deg, e.direction_deg) +
              0.999 * synth::ellipse_radius_along(a, b, axis_deg, e.direction_deg + 180.0);
  for (int i = 0; i < 50; ++i) {
    e.depth_px = 0.5 * (lo + hi);
    (wedge_area_fraction(a, b, axis_deg, e) < fraction ? lo : hi) = e.depth_px;
  }
  return 0.5 * (lo + hi);
}

/// Noise category of a kinematics corpus video.
enum class NoiseKind {
  kClean,        // A: no noise
  kOcclusion,    // B: instrument wedges over the unfolded lens
  kHookFaults,   // C: dropped, low-confidence and duplicated hook boxes
  kSpurious,     // D: false hook boxes anywhere on the lens
  kJitter,       // E: boundary jitter while folded, noisy phase probabilities
  kCombined,     // F: B + C + E
};

inline const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::kClean: return "clean";
    case NoiseKind::kOcclusion: return "occlusion";
    case NoiseKind::kHookFaults: return "hook-faults";
    case NoiseKind::kSpurious: return "spurious";
    case NoiseKind::kJitter: return "jitter";
    case NoiseKind::kCombined: return "combined";
  }
  return "?";
}

struct CorpusVideo {
  NoiseKind kind;
  synth::SynthSpec spec;
};

/// Mixed-noise videos cycling through the six categories. Lens paths come
/// from the study generator; noise is layered on top.
inline std::vector<CorpusVideo> kinematics_corpus(std::uint64_t seed, std::size_t n) {
  synth::BrandSpec brand;
  brand.name = "corpus";
  brand.videos = n;
  brand.rotation_mean_deg = 20.0;
  brand.rotation_sd_deg = 10.0;
  brand.unfold_mean_s = 4.0;
  brand.unfold_sd_s = 1.0;
  brand.drift_mean_px = 40.0;
  brand.drift_sd_px = 6.0;
  const auto specs = synth::make_study_specs({seed, {brand}});

  Rng rng(seed ^ 0x5DEECE66DULL);
  std::vector<CorpusVideo> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CorpusVideo v{static_cast<NoiseKind>(i % 6), specs[i].spec};
    synth::SynthSpec& s = v.spec;
    const bool occlude = v.kind == NoiseKind::kOcclusion || v.kind == NoiseKind::kCombined;
    const bool faults = v.kind == NoiseKind::kHookFaults || v.kind == NoiseKind::kCombined;
    const bool jitter = v.kind == NoiseKind::kJitter || v.kind == NoiseKind::kCombined;
    if (occlude) {
      const auto n_post = static_cast<double>(s.n_frames - synth::post_implantation_start(s));
      const int events = 1 + static_cast<int>(rng.index(2));
      for (int e = 0; e < events; ++e) {
        synth::OcclusionEvent ev;
        const double begin = rng.uniform(s.unfold_plateau + 30.0, n_post - 45.0);
        ev.start = static_cast<FrameIndex>(begin);
        ev.end = ev.start + 10 + static_cast<FrameIndex>(rng.index(31));
        ev.direction_deg = rng.uniform(0.0, 360.0);
        ev.opening_deg = rng.uniform(10.0, 25.0);
        ev.depth_px = wedge_depth_for_fraction(s.semi_major, s.semi_minor, 0.0, ev, rng.uniform(0.03, 0.10));
        s.occlusions.push_back(ev);
      }
    }
    if (faults) {
      s.detection.dropout_rate = 0.1;
      s.detection.low_conf_rate = 0.1;
      s.detection.spurious_rate = 0.1;
      s.detection.duplicate_fraction = 1.0;
    }
    if (v.kind == NoiseKind::kSpurious) {
      s.detection.spurious_rate = 0.15;
      s.detection.duplicate_fraction = 0.0;
    }
    if (jitter) {
      s.mask.boundary_jitter_px = 0.5;
      s.phase_noise = 0.05;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace iolkin::testing
