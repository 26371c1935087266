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

// iolkin command line: analyze, study, synth, eval.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "iolkin/error.hpp"
#include "iolkin/pipeline.hpp"
#include "iolkin/synth.hpp"

namespace {

using namespace iolkin;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

pipeline::Config load_config(const std::string& path) {
  return path.empty() ? pipeline::Config{} : pipeline::config_from_json(read_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intraocular lens kinematics from masks, detections and phase probabilities"};
  app.require_subcommand(1);

  std::string masks, detections, phase_csv, config_path, out;
  auto* analyze = app.add_subcommand("analyze", "Kinematics report for one video");
  analyze->add_option("--masks", masks, "masks.jsonl")->required()->check(CLI::ExistingFile);
  analyze->add_option("--detections", detections, "detections.jsonl")->required()->check(CLI::ExistingFile);
  analyze->add_option("--phase", phase_csv, "phase.csv")->required()->check(CLI::ExistingFile);
  analyze->add_option("--config", config_path, "config JSON")->check(CLI::ExistingFile);
  analyze->add_option("--out", out, "report JSON")->required();

  std::string manifest, boxplots;
  auto* study = app.add_subcommand("study", "Cross-brand statistics over a manifest of videos");
  study->add_option("--manifest", manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  study->add_option("--config", config_path, "config JSON")->check(CLI::ExistingFile);
  study->add_option("--boxplots", boxplots, "also write boxplot statistics as CSV");
  study->add_option("--out", out, "study JSON")->required();

  std::string spec;
  auto* synth = app.add_subcommand("synth", "Render a synthetic video or study");
  synth->add_option("--spec", spec, "video or study spec JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out, "output directory")->required();

  std::string pred, gt;
  auto* eval = app.add_subcommand("eval", "Compare predicted streams with ground truth");
  eval->add_option("--pred", pred, "predicted masks or detections")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", gt, "ground-truth stream of the same kind")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", config_path, "config JSON")->check(CLI::ExistingFile);
  eval->add_option("--out", out, "metrics JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      const auto result = pipeline::run_video(pipeline::VideoPaths{masks, detections, phase_csv}, load_config(config_path));
      write_file(out, pipeline::video_report_json(result));
    } else if (*study) {
      const auto outcome = pipeline::run_study(pipeline::load_manifest(manifest), load_config(config_path));
      write_file(out, pipeline::study_report_json(outcome));
      if (!boxplots.empty()) write_file(boxplots, pipeline::boxplot_csv(outcome.result));
      for (const auto& v : outcome.videos)
        if (v.failure)
          std::cerr << "warning: " << v.brand << " video " << v.index << " failed at " << v.failure->stage << ": "
                    << v.failure->code << ": " << v.failure->message << '\n';
    } else if (*synth) {
      const std::string text = read_file(spec);
      if (synth::is_study_json(text)) {
        const auto bundle = synth::generate_study(synth::study_from_json(text));
        synth::write_study(bundle, out);
        std::cout << "wrote " << bundle.videos.size() << " videos and manifest.json to " << out << '\n';
      } else {
        synth::write_video(synth::generate_video(synth::spec_from_json(text)), out);
        std::cout << "wrote masks.jsonl, detections.jsonl, phase.csv, truth.json to " << out << '\n';
      }
    } else if (*eval) {
      write_file(out, pipeline::evaluate_streams(read_file(pred), read_file(gt), load_config(config_path)));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
