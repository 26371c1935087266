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

#include "iolkin/hookpose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "iolkin/error.hpp"

namespace iolkin::hookpose {

std::vector<DetectionRecord> filter_by_confidence(std::span<const DetectionRecord> dets, double threshold) {
  std::vector<DetectionRecord> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [threshold](const DetectionRecord& d) { return d.confidence > threshold; });
  return out;
}

double angle_between(Point2 a, Point2 b, Point2 center) {
  const Point2 u = a - center;
  const Point2 v = b - center;
  if ((u.x == 0.0 && u.y == 0.0) || (v.x == 0.0 && v.y == 0.0))
    throw Error(ErrorCode::kDegenerateVector, "hook coincides with the lens centre");
  const double dot = u.x * v.x + u.y * v.y;
  const double crs = u.x * v.y - u.y * v.x;
  return std::atan2(std::abs(crs), dot) * 180.0 / std::numbers::pi;
}

bool opposition_check(Point2 h1, Point2 h2, Point2 lens_center, double tol_deg) {
  // angle_between never exceeds 180, so only the lower bound can fail.
  return angle_between(h1, h2, lens_center) >= 180.0 - tol_deg;
}

std::array<std::vector<std::size_t>, 2> cluster_two(std::span<const Point2> points) {
  const std::size_t n = points.size();
  if (n < 3) throw Error(ErrorCode::kTooFewPoints, "clustering needs at least three points");

  // Linkage matrix between live clusters, indexed by cluster id.
  std::vector<double> link(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (points[i] - points[j]).norm();
      link[i * n + j] = d;
      link[j * n + i] = d;
    }
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<bool> alive(n, true);

  for (std::size_t live = n; live > 2; --live) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        if (link[i * n + j] < best) {
          best = link[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    members[bj].clear();
    alive[bj] = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (!alive[k] || k == bi) continue;
      const double d = std::max(link[bi * n + k], link[bj * n + k]);
      link[bi * n + k] = d;
      link[k * n + bi] = d;
    }
  }

  std::array<std::vector<std::size_t>, 2> out;
  std::size_t slot = 0;
  for (std::size_t i = 0; i < n && slot < 2; ++i) {
    if (!alive[i]) continue;
    out[slot] = members[i];
    std::sort(out[slot].begin(), out[slot].end());
    ++slot;
  }
  return out;
}

namespace {

Hook to_hook(const DetectionRecord& d) { return {d.bbox.center(), d.confidence}; }

// Two candidate hooks in input order; applies the opposition rule.
std::vector<Hook> resolve_pair(const Hook& first, const Hook& second, Point2 lens_center, double tol_deg) {
  bool opposite = false;
  try {
    opposite = opposition_check(first.center, second.center, lens_center, tol_deg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateVector) throw;
  }
  if (opposite) return {first, second};
  return {second.confidence > first.confidence ? second : first};
}

}  // namespace

HookSelection select_hooks(std::span<const DetectionRecord> hook_dets, Point2 lens_center, double tol_deg) {
  HookSelection sel;
  if (!hook_dets.empty()) sel.frame_index = hook_dets.front().frame_index;

  if (hook_dets.size() <= 1) {
    sel.scenario = Scenario::kZeroOrOne;
    for (const DetectionRecord& d : hook_dets) sel.kept_hooks.push_back(to_hook(d));
    return sel;
  }
  if (hook_dets.size() == 2) {
    sel.scenario = Scenario::kPair;
    sel.kept_hooks = resolve_pair(to_hook(hook_dets[0]), to_hook(hook_dets[1]), lens_center, tol_deg);
    return sel;
  }

  sel.scenario = Scenario::kClustered;
  std::vector<Point2> centers;
  centers.reserve(hook_dets.size());
  for (const DetectionRecord& d : hook_dets) centers.push_back(d.bbox.center());
  const auto clusters = cluster_two(centers);

  std::array<std::size_t, 2> best{};
  for (std::size_t c = 0; c < 2; ++c) {
    best[c] = clusters[c].front();
    for (std::size_t idx : clusters[c])
      if (hook_dets[idx].confidence > hook_dets[best[c]].confidence) best[c] = idx;
  }
  std::sort(best.begin(), best.end());
  sel.kept_hooks = resolve_pair(to_hook(hook_dets[best[0]]), to_hook(hook_dets[best[1]]), lens_center, tol_deg);
  return sel;
}

std::optional<OrientationSample> orientation(const HookSelection& selection, Point2 lens_center) {
  const auto& hooks = selection.kept_hooks;
  if (hooks.empty()) return std::nullopt;
  if (hooks.size() > 2) throw Error(ErrorCode::kInvalidArgument, "a selection keeps at most two hooks");

  OrientationSample s;
  s.frame_index = selection.frame_index;
  Point2 axis;
  if (hooks.size() == 2) {
    axis = hooks[1].center - hooks[0].center;
    s.source = OrientationSource::kTwoHooks;
  } else {
    axis = hooks[0].center - lens_center;
    s.source = OrientationSource::kOneHook;
  }
  if (axis.x == 0.0 && axis.y == 0.0) throw Error(ErrorCode::kDegenerateVector, "orientation vector has zero length");
  s.angle_deg = angle_deg(axis);
  return s;
}

}  // namespace iolkin::hookpose
