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


// Python bindings. Reports cross the boundary as JSON text; the iolkin
// package turns them into dicts.

#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "iolkin/error.hpp"
#include "iolkin/geometry.hpp"
#include "iolkin/ingest.hpp"
#include "iolkin/pipeline.hpp"
#include "iolkin/stats.hpp"
#include "iolkin/synth.hpp"

namespace py = pybind11;
using namespace iolkin;

namespace {

using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Bitmap to_bitmap(const MaskArray& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::kDimensionMismatch, "mask must be a 2-D array (height, width)");
  Bitmap b(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const auto* src = a.data();
  for (std::size_t i = 0; i < b.cells.size(); ++i) b.cells[i] = src[i] != 0;
  return b;
}

MaskArray to_array(const Bitmap& b) {
  MaskArray out({b.height, b.width});
  std::memcpy(out.mutable_data(), b.cells.data(), b.cells.size());
  return out;
}

MaskFrame to_mask(const MaskArray& a) { return encode(to_bitmap(a), 0, MaskClass::kLens); }

pipeline::Config config_of(const std::string& config_json) {
  return config_json.empty() ? pipeline::Config{} : pipeline::config_from_json(config_json);
}

}  // namespace

PYBIND11_MODULE(_iolkin, m) {
  m.doc() = "Intraocular lens kinematics core";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&] { return py::reinterpret_steal<py::object>(PyErr_NewException("iolkin._iolkin.IolkinError", PyExc_RuntimeError, nullptr)); });
  m.attr("IolkinError") = error_type.get_stored();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type.get_stored()(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      exc.attr("stage") = e.stage().empty() ? py::object(py::none()) : py::object(py::str(e.stage()));
      exc.attr("line") = e.line() ? py::object(py::int_(*e.line())) : py::object(py::none());
      exc.attr("detail") = e.detail();
      PyErr_SetObject(error_type.get_stored().ptr(), exc.ptr());
    }
  });

  // Masks.
  m.def("rle_encode", [](const MaskArray& mask) { return encode_rle(to_bitmap(mask)); }, py::arg("mask"),
        "Background-first row-major run lengths of a (height, width) mask.");
  m.def(
      "rle_decode",
      [](const std::vector<std::uint32_t>& rle, int width, int height) {
        return to_array(decode_rle(rle, width, height));
      },
      py::arg("rle"), py::arg("width"), py::arg("height"), "Inverse of rle_encode; validates the run lengths.");
  m.def("convex_refine", [](const MaskArray& mask) { return to_array(decode(geometry::convex_refine(to_mask(mask)))); },
        py::arg("mask"), "Fills the convex hull of the foreground pixel centres.");
  m.def("mask_area", [](const MaskArray& mask) { return geometry::mask_area(to_mask(mask)); }, py::arg("mask"));
  m.def(
      "mask_centroid",
      [](const MaskArray& mask) {
        const Point2 c = geometry::mask_centroid(to_mask(mask));
        return std::pair{c.x, c.y};
      },
      py::arg("mask"), "(x, y) centroid of the foreground pixel centres.");

  // Statistics.
  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const double r = stats::pearson(x, y);
        return std::pair{r, stats::pearson_pvalue(r, x.size())};
      },
      py::arg("x"), py::arg("y"), "(r, two-sided p).");
  m.def(
      "ttest",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::string& mode) {
        const auto t = stats::ttest(x, y, stats::ttest_mode_from_string(mode));
        py::dict d;
        d["statistic"] = t.statistic;
        d["dof"] = t.dof;
        d["p_value"] = t.p_value ? py::object(py::float_(*t.p_value)) : py::object(py::none());
        d["mode"] = std::string(stats::to_string(t.mode));
        return d;
      },
      py::arg("x"), py::arg("y"), py::arg("mode") = "standard", "Two-sample t-test, x minus y.");
  m.def("student_t_sf", &stats::student_t_sf, py::arg("t"), py::arg("dof"));

  // Pipeline.
  m.def(
      "analyze_files",
      [](const std::filesystem::path& masks, const std::filesystem::path& detections,
         const std::filesystem::path& phase, const std::string& config_json) {
        const auto config = config_of(config_json);
        py::gil_scoped_release release;
        return pipeline::video_report_json(pipeline::run_video(pipeline::VideoPaths{masks, detections, phase}, config));
      },
      py::arg("masks"), py::arg("detections"), py::arg("phase"), py::arg("config_json") = "");
  m.def(
      "analyze_text",
      [](const std::string& masks, const std::string& detections, const std::string& phase,
         const std::string& config_json) {
        const auto config = config_of(config_json);
        py::gil_scoped_release release;
        return pipeline::video_report_json(pipeline::run_video(pipeline::parse_video(masks, detections, phase), config));
      },
      py::arg("masks_jsonl"), py::arg("detections_jsonl"), py::arg("phase_csv"), py::arg("config_json") = "");
  m.def(
      "study",
      [](const std::filesystem::path& manifest, const std::string& config_json) {
        const auto config = config_of(config_json);
        py::gil_scoped_release release;
        const auto outcome = pipeline::run_study(pipeline::load_manifest(manifest), config);
        return std::pair{pipeline::study_report_json(outcome), pipeline::boxplot_csv(outcome.result)};
      },
      py::arg("manifest"), py::arg("config_json") = "", "(study JSON, boxplot CSV).");
  m.def(
      "evaluate",
      [](const std::string& pred, const std::string& gt, const std::string& config_json) {
        const auto config = config_of(config_json);
        py::gil_scoped_release release;
        return pipeline::evaluate_streams(pred, gt, config);
      },
      py::arg("pred_text"), py::arg("gt_text"), py::arg("config_json") = "");

  // Synthesis.
  m.def(
      "synth_video",
      [](const std::string& spec_json) {
        const auto spec = synth::spec_from_json(spec_json);
        synth::SynthVideo v;
        {
          py::gil_scoped_release release;
          v = synth::generate_video(spec);
        }
        py::dict d;
        d["masks_jsonl"] = v.masks_jsonl;
        d["detections_jsonl"] = v.detections_jsonl;
        d["phase_csv"] = v.phase_csv;
        d["truth_json"] = synth::truth_to_json(v.truth);
        return d;
      },
      py::arg("spec_json"), "Renders one video from a spec; missing keys keep their defaults.");
  m.def(
      "synth_write",
      [](const std::string& spec_json, const std::filesystem::path& out) {
        py::gil_scoped_release release;
        if (synth::is_study_json(spec_json)) {
          synth::write_study(synth::generate_study(synth::study_from_json(spec_json)), out);
        } else {
          synth::write_video(synth::generate_video(synth::spec_from_json(spec_json)), out);
        }
      },
      py::arg("spec_json"), py::arg("out"), "Writes a video or, for a study spec, a study bundle with manifest.json.");
}
