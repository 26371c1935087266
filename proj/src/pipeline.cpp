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

#include "iolkin/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "iolkin/error.hpp"
#include "iolkin/evalmetrics.hpp"
#include "iolkin/geometry.hpp"

namespace iolkin::pipeline {

namespace {

using ojson = nlohmann::ordered_json;

template <typename F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Prefixes parse errors with the stream they came from.
template <typename F>
auto parse_named(const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    if (e.line()) throw Error(e.code(), name + ": " + e.detail(), *e.line());
    throw Error(e.code(), name + ": " + e.detail());
  }
}

ojson config_json(const Config& c) {
  ojson j;
  j["conf_threshold"] = c.conf_threshold;
  j["opposition_tol_deg"] = c.opposition_tol_deg;
  j["phase_threshold"] = c.phase_threshold;
  j["smooth_window"] = c.smooth_window;
  j["instability_mode"] = std::string(kinematics::to_string(c.instability_mode));
  j["ttest_mode"] = std::string(stats::to_string(c.ttest_mode));
  j["coverage_min"] = c.coverage_min;
  j["workers"] = c.workers;
  return j;
}

ojson report_json(const VideoResult& r) {
  const auto& k = r.report;
  ojson j;
  j["t_u_frames"] = k.t_u_frames;
  j["t_u_seconds"] = k.t_u_seconds;
  j["instability_px"] = k.instability_px;
  j["rotation_deg"] = k.rotation_deg;
  j["coverage"] = k.coverage;
  j["instability_mode"] = std::string(kinematics::to_string(k.instability_mode));
  j["low_coverage"] = k.low_coverage;
  j["post_implantation_start_frame"] = k.post_implantation_start_frame;
  j["implantation_clips"] = {r.interval.first_clip, r.interval.last_clip};
  j["n_frames"] = k.n_frames;
  j["n_track_samples"] = k.n_track_samples;
  j["n_orientation_samples"] = k.n_orientation_samples;
  j["config"] = config_json(r.config);
  return j;
}

ojson boxplot_json(const std::optional<stats::BoxplotSummary>& b) {
  if (!b) return nullptr;
  return {{"q1", b->q1},
          {"median", b->median},
          {"q3", b->q3},
          {"iqr", b->iqr},
          {"lower_whisker", b->lower_whisker},
          {"upper_whisker", b->upper_whisker},
          {"outliers", b->outliers}};
}

// JSON has no infinities; a perfectly separated pair is written as a string.
ojson real_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ojson table_json(const stats::PairTable& t) {
  ojson cells = ojson::array();
  for (const auto& row : t.cells) {
    ojson r = ojson::array();
    for (const auto& cell : row) {
      if (!cell) {
        r.push_back(nullptr);
        continue;
      }
      ojson c{{"t", real_json(cell->statistic)}, {"dof", cell->dof}};
      c["p"] = cell->p_value ? ojson(*cell->p_value) : ojson(nullptr);
      r.push_back(c);
    }
    cells.push_back(r);
  }
  return {{"brands", t.brands}, {"cells", cells}};
}

// Orientation samples for frames [first, last]. The lens centre of a frame
// comes from its lens box or mask centroid, else the last centre seen.
std::vector<hookpose::OrientationSample> orientations_from_detections(std::span<const DetectionRecord> dets,
                                                                      const std::map<FrameIndex, Point2>& centroids,
                                                                      FrameIndex first, FrameIndex last,
                                                                      const Config& config) {
  std::vector<hookpose::OrientationSample> out;
  std::optional<Point2> previous;
  auto it = std::lower_bound(dets.begin(), dets.end(), first,
                             [](const DetectionRecord& d, FrameIndex f) { return d.frame_index < f; });
  while (it != dets.end() && it->frame_index <= last) {
    const FrameIndex f = it->frame_index;
    auto end = it;
    while (end != dets.end() && end->frame_index == f) ++end;
    const std::span<const DetectionRecord> frame(&*it, static_cast<std::size_t>(end - it));
    it = end;

    std::optional<Point2> centroid;
    if (auto c = centroids.find(f); c != centroids.end()) centroid = c->second;
    auto center = lens_center_for_frame(frame, centroid, config.conf_threshold);
    if (!center) center = previous;
    if (!center) continue;
    previous = center;

    std::vector<DetectionRecord> hooks;
    for (const auto& d : frame)
      if (d.class_label == DetClass::kHook) hooks.push_back(d);
    hooks = hookpose::filter_by_confidence(hooks, config.conf_threshold);
    const auto selection = hookpose::select_hooks(hooks, *center, config.opposition_tol_deg);
    try {
      if (auto o = hookpose::orientation(selection, *center)) out.push_back(*o);
    } catch (const Error& e) {
      // A hook centred exactly on the lens centre carries no direction.
      if (e.code() != ErrorCode::kDegenerateVector) throw;
    }
  }
  return out;
}

}  // namespace

Config config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  Config c;
  auto number = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw Error(ErrorCode::kInvalidArgument, std::string("config.") + key + " must be a number");
    out = j[key].get<double>();
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::set<std::string> known{"conf_threshold", "opposition_tol_deg", "phase_threshold",
                                             "smooth_window",  "instability_mode",   "ttest_mode",
                                             "coverage_min",   "workers"};
    if (!known.count(it.key())) throw Error(ErrorCode::kInvalidArgument, "unknown config key \"" + it.key() + "\"");
  }
  number("conf_threshold", c.conf_threshold);
  number("opposition_tol_deg", c.opposition_tol_deg);
  number("phase_threshold", c.phase_threshold);
  number("coverage_min", c.coverage_min);
  if (j.contains("smooth_window")) {
    if (!j["smooth_window"].is_number_integer())
      throw Error(ErrorCode::kInvalidArgument, "config.smooth_window must be an integer");
    c.smooth_window = j["smooth_window"].get<int>();
  }
  if (j.contains("workers")) {
    if (!j["workers"].is_number_unsigned())
      throw Error(ErrorCode::kInvalidArgument, "config.workers must be a non-negative integer");
    c.workers = j["workers"].get<unsigned>();
  }
  if (j.contains("instability_mode")) {
    if (!j["instability_mode"].is_string())
      throw Error(ErrorCode::kInvalidArgument, "config.instability_mode must be a string");
    c.instability_mode = kinematics::instability_mode_from_string(j["instability_mode"].get<std::string>());
  }
  if (j.contains("ttest_mode")) {
    if (!j["ttest_mode"].is_string()) throw Error(ErrorCode::kInvalidArgument, "config.ttest_mode must be a string");
    c.ttest_mode = stats::ttest_mode_from_string(j["ttest_mode"].get<std::string>());
  }
  if (!(c.conf_threshold >= 0.0 && c.conf_threshold <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "config.conf_threshold must lie in [0,1]");
  if (!(c.phase_threshold > 0.0 && c.phase_threshold < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "config.phase_threshold must lie in (0,1)");
  if (!(c.opposition_tol_deg >= 0.0 && c.opposition_tol_deg <= 180.0))
    throw Error(ErrorCode::kInvalidArgument, "config.opposition_tol_deg must lie in [0,180]");
  if (c.smooth_window < 1 || c.smooth_window % 2 == 0)
    throw Error(ErrorCode::kInvalidArgument, "config.smooth_window must be odd and positive");
  if (!(c.coverage_min >= 0.0 && c.coverage_min <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "config.coverage_min must lie in [0,1]");
  return c;
}

std::string config_to_json(const Config& config) { return config_json(config).dump(2) + "\n"; }

VideoStreams parse_video(const std::string& masks_jsonl, const std::string& detections_jsonl,
                         const std::string& phase_csv) {
  return in_stage("ingest", [&] {
    VideoStreams s;
    std::istringstream m(masks_jsonl);
    std::istringstream d(detections_jsonl);
    std::istringstream p(phase_csv);
    s.masks = parse_named("masks", [&] { return parse_mask_stream(m); });
    s.detections = parse_named("detections", [&] { return parse_detection_stream(d); });
    s.phase = parse_named("phase", [&] { return parse_phase_series(p); });
    return s;
  });
}

VideoStreams load_video(const VideoPaths& paths) {
  return in_stage("ingest", [&] {
    VideoStreams s;
    auto open = [](const std::filesystem::path& path) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
      return in;
    };
    auto m = open(paths.masks);
    s.masks = parse_named(paths.masks.string(), [&] { return parse_mask_stream(m); });
    auto d = open(paths.detections);
    s.detections = parse_named(paths.detections.string(), [&] { return parse_detection_stream(d); });
    auto p = open(paths.phase);
    s.phase = parse_named(paths.phase.string(), [&] { return parse_phase_series(p); });
    return s;
  });
}

std::optional<Point2> lens_center_for_frame(std::span<const DetectionRecord> frame_dets,
                                            const std::optional<Point2>& mask_centroid, double conf_threshold) {
  const DetectionRecord* best = nullptr;
  for (const auto& d : frame_dets)
    if (d.class_label == DetClass::kLens && d.confidence > conf_threshold &&
        (best == nullptr || d.confidence > best->confidence))
      best = &d;
  if (best != nullptr) return best->bbox.center();
  return mask_centroid;
}

VideoResult run_video(const VideoStreams& streams, const Config& config) {
  VideoResult out;
  out.config = config;

  in_stage("phase", [&] {
    out.clips = phase::classify_clips(streams.phase, config.phase_threshold);
    out.interval = phase::locate_implantation_interval(out.clips.labels);
  });
  const FrameIndex start = out.interval.post_implantation_start_frame;

  const auto track = in_stage(
      "geometry", [&] { return geometry::build_track(streams.masks.lens, streams.masks.pupil, start); });

  const kinematics::ReportOptions options{config.smooth_window, config.instability_mode, config.coverage_min};
  in_stage("kinematics", [&] {
    kinematics::track_unfolding_offset(track, start, config.smooth_window);
    std::vector<Point2> rel;
    for (const auto& g : track) rel.push_back(g.rel_pos);
    kinematics::instability(rel, config.instability_mode);
  });

  in_stage("hookpose", [&] {
    std::map<FrameIndex, Point2> centroids;
    for (const auto& g : track) centroids.emplace(g.frame_index, g.lens_center);
    out.orientations = orientations_from_detections(streams.detections, centroids, start, track.back().frame_index, config);
  });

  out.report = in_stage("rotation", [&] { return kinematics::compute_report(track, out.orientations, start, options); });
  return out;
}

VideoResult run_video(const VideoPaths& paths, const Config& config) { return run_video(load_video(paths), config); }

Manifest manifest_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  auto bad = [](const std::string& why) { return Error(ErrorCode::kInvalidArgument, "manifest: " + why); };
  if (j.is_discarded()) throw bad("malformed JSON");
  if (!j.is_object() || !j.contains("brands") || !j["brands"].is_array()) throw bad("needs a \"brands\" list");
  Manifest m;
  std::set<std::string> seen;
  auto resolve = [&](const nlohmann::json& v, const char* key) {
    if (!v.contains(key) || !v[key].is_string()) throw bad(std::string("every video needs a \"") + key + "\" path");
    std::filesystem::path p = v[key].get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  for (const auto& b : j["brands"]) {
    if (!b.is_object() || !b.contains("name") || !b["name"].is_string()) throw bad("every brand needs a name");
    ManifestBrand brand;
    brand.name = b["name"].get<std::string>();
    if (brand.name.empty()) throw bad("brand names must be non-empty");
    if (!seen.insert(brand.name).second) throw bad("duplicate brand \"" + brand.name + "\"");
    if (!b.contains("videos") || !b["videos"].is_array()) throw bad("brand \"" + brand.name + "\" needs a videos list");
    for (const auto& v : b["videos"])
      brand.videos.push_back({{resolve(v, "masks"), resolve(v, "detections"), resolve(v, "phase")}});
    m.brands.push_back(std::move(brand));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_file(path), path.parent_path());
}

StudyOutcome run_study(const Manifest& manifest, const Config& config) {
  StudyOutcome out;
  out.config = config;
  for (const auto& b : manifest.brands)
    for (std::size_t i = 0; i < b.videos.size(); ++i) out.videos.push_back({b.name, i, b.videos[i].paths, {}, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.videos.size(); i = next++) {
      VideoOutcome& v = out.videos[i];
      try {
        v.result = run_video(v.paths, config);
      } catch (const Error& e) {
        v.failure = VideoFailure{e.stage(), std::string(error_code_name(e.code())), e.detail()};
      } catch (const std::exception& e) {
        v.failure = VideoFailure{"", "Internal", e.what()};
      }
    }
  };
  unsigned n = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, out.videos.size())));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  std::vector<stats::BrandSample> samples;
  for (const auto& b : manifest.brands) {
    stats::BrandSample s;
    s.brand = b.name;
    for (const auto& v : out.videos) {
      if (v.brand != b.name || !v.result) continue;
      s.unfolding.push_back(v.result->report.t_u_seconds);
      s.instability.push_back(v.result->report.instability_px);
      s.rotation.push_back(v.result->report.rotation_deg);
    }
    if (s.rotation.size() < kMinVideosPerBrand) {
      out.excluded.push_back({b.name, s.rotation.size(),
                              "fewer than " + std::to_string(kMinVideosPerBrand) + " usable videos"});
      continue;
    }
    samples.push_back(std::move(s));
  }
  if (samples.size() < 2)
    throw Error(ErrorCode::kInsufficientBrands,
                "a study needs at least two brands with " + std::to_string(kMinVideosPerBrand) + " usable videos, got " +
                    std::to_string(samples.size()));
  out.result = stats::run_study(std::move(samples), config.ttest_mode);
  return out;
}

std::string video_report_json(const VideoResult& result) { return report_json(result).dump(2) + "\n"; }

std::string study_report_json(const StudyOutcome& o) {
  const auto& r = o.result;
  ojson j;
  j["config"] = config_json(o.config);
  j["ttest_mode"] = std::string(stats::to_string(r.ttest_mode));
  j["quantile_method"] = r.quantile_method;
  j["unfolding_unit"] = "s";
  ojson brands = ojson::array();
  for (const auto& b : r.brands) {
    ojson pr;
    pr["r"] = b.unfolding_rotation.r ? ojson(*b.unfolding_rotation.r) : ojson(nullptr);
    pr["p"] = b.unfolding_rotation.p_value ? ojson(*b.unfolding_rotation.p_value) : ojson(nullptr);
    if (!b.unfolding_rotation.note.empty()) pr["note"] = b.unfolding_rotation.note;
    brands.push_back({{"name", b.brand},
                      {"m", b.m},
                      {"unfolding", boxplot_json(b.unfolding)},
                      {"instability", boxplot_json(b.instability)},
                      {"rotation", boxplot_json(b.rotation)},
                      {"pearson_unfolding_rotation", pr}});
  }
  j["brands"] = brands;
  j["ttests"] = {{"rotation", table_json(r.rotation)},
                 {"unfolding", table_json(r.unfolding)},
                 {"instability", table_json(r.instability)}};
  ojson excluded = ojson::array();
  for (const auto& e : o.excluded)
    excluded.push_back({{"name", e.name}, {"usable_videos", e.usable_videos}, {"reason", e.reason}});
  j["excluded_brands"] = excluded;
  ojson videos = ojson::array();
  for (const auto& v : o.videos) {
    ojson e{{"brand", v.brand}, {"index", v.index}, {"masks", v.paths.masks.string()}};
    if (v.result) {
      ojson rep = report_json(*v.result);
      rep.erase("config");
      e["report"] = rep;
    } else if (v.failure) {
      e["error"] = {{"stage", v.failure->stage}, {"code", v.failure->code}, {"message", v.failure->message}};
    }
    videos.push_back(e);
  }
  j["videos"] = videos;
  return j.dump(2) + "\n";
}

std::string boxplot_csv(const stats::StudyResult& result) {
  std::ostringstream os;
  os << "brand,measure,n,q1,median,q3,iqr,lower_whisker,upper_whisker,outliers\n";
  for (const auto& b : result.brands) {
    const std::pair<const char*, const std::optional<stats::BoxplotSummary>*> rows[] = {
        {"unfolding_s", &b.unfolding}, {"instability_px", &b.instability}, {"rotation_deg", &b.rotation}};
    for (const auto& [name, box] : rows) {
      if (!*box) continue;
      const auto& s = **box;
      os << b.brand << ',' << name << ',' << b.m << ',' << format_real(s.q1) << ',' << format_real(s.median) << ','
         << format_real(s.q3) << ',' << format_real(s.iqr) << ',' << format_real(s.lower_whisker) << ','
         << format_real(s.upper_whisker) << ',';
      for (std::size_t i = 0; i < s.outliers.size(); ++i) os << (i ? ";" : "") << format_real(s.outliers[i]);
      os << '\n';
    }
  }
  return os.str();
}

namespace {

enum class StreamKind { kMasks, kDetections };

StreamKind sniff(const std::string& text, const char* name) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("rle")) return StreamKind::kMasks;
    if (j.is_object() && j.contains("bbox")) return StreamKind::kDetections;
    break;
  }
  throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is neither a mask nor a detection stream");
}

ojson mask_agreement(const MaskSequence& pred, const MaskSequence& gt) {
  std::map<FrameIndex, std::pair<const MaskFrame*, const MaskFrame*>> frames;
  for (const auto& f : pred.frames) frames[f.frame_index].first = &f;
  for (const auto& f : gt.frames) frames[f.frame_index].second = &f;
  double iou = 0.0;
  double dice = 0.0;
  for (const auto& [index, pair] : frames) {
    const MaskFrame& some = pair.first ? *pair.first : *pair.second;
    const MaskFrame empty = encode(Bitmap(some.width, some.height), index, some.class_label);
    const MaskFrame& p = pair.first ? *pair.first : empty;
    const MaskFrame& g = pair.second ? *pair.second : empty;
    iou += evalmetrics::mask_iou(p, g);
    dice += evalmetrics::mask_dice(p, g);
  }
  if (frames.empty()) return nullptr;
  const auto n = static_cast<double>(frames.size());
  return {{"frames", frames.size()}, {"mean_iou", iou / n}, {"mean_dice", dice / n}};
}

}  // namespace

std::string evaluate_streams(const std::string& pred_text, const std::string& gt_text, const Config& config) {
  const StreamKind kind = sniff(pred_text, "prediction");
  if (sniff(gt_text, "ground truth") != kind)
    throw Error(ErrorCode::kInvalidArgument, "prediction and ground truth are different stream kinds");
  ojson j;
  std::istringstream pin(pred_text);
  std::istringstream gin(gt_text);
  if (kind == StreamKind::kMasks) {
    const MaskSet pred = parse_named("prediction", [&] { return parse_mask_stream(pin); });
    const MaskSet gt = parse_named("ground truth", [&] { return parse_mask_stream(gin); });
    j["kind"] = "masks";
    j["lens"] = mask_agreement(pred.lens, gt.lens);
    j["pupil"] = mask_agreement(pred.pupil, gt.pupil);
    return j.dump(2) + "\n";
  }

  const auto pred = parse_named("prediction", [&] { return parse_detection_stream(pin); });
  const auto gt = parse_named("ground truth", [&] { return parse_detection_stream(gin); });
  j["kind"] = "detections";
  j["iou_threshold"] = 0.5;
  const auto per_class = evalmetrics::ap_per_class(pred, gt, 0.5);
  ojson ap;
  for (const auto& [cls, v] : per_class) ap[std::string(to_string(cls))] = v;
  j["ap"] = ap;
  j["map"] = evalmetrics::map_at_iou(pred, gt, 0.5);

  const std::map<FrameIndex, Point2> none;
  const FrameIndex last = std::max(pred.empty() ? 0 : pred.back().frame_index, gt.back().frame_index);
  const auto po = orientations_from_detections(pred, none, 0, last, config);
  const auto go = orientations_from_detections(gt, none, 0, last, config);
  std::map<FrameIndex, double> truth;
  for (const auto& o : go) truth[o.frame_index] = o.angle_deg;
  std::vector<double> pa;
  std::vector<double> ta;
  for (const auto& o : po)
    if (auto t = truth.find(o.frame_index); t != truth.end()) {
      pa.push_back(o.angle_deg);
      ta.push_back(t->second);
    }
  if (pa.empty()) {
    j["orientation_error"] = nullptr;
  } else {
    const auto e = evalmetrics::orientation_error_summary(pa, ta);
    ojson topk;
    for (const auto& [k, v] : e.topk_means) topk[std::to_string(k)] = v;
    j["orientation_error"] = {{"frames", pa.size()}, {"mean", e.mean}, {"std", e.std}, {"topk_means", topk}};
  }
  return j.dump(2) + "\n";
}

}  // namespace iolkin::pipeline
