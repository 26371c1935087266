# Copyright 2026 The iolkin Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Intraocular lens kinematics from segmentation masks, hook detections and
phase probabilities.

Array helpers take and return (height, width) uint8 masks. Pipeline entry
points take an optional config dict and return parsed JSON reports.
"""

import json as _json
import os as _os

from ._iolkin import (
    IolkinError,
    convex_refine,
    mask_area,
    mask_centroid,
    pearson,
    rle_decode,
    rle_encode,
    student_t_sf,
    ttest,
)
from . import _iolkin

__all__ = [
    "IolkinError",
    "analyze",
    "analyze_text",
    "convex_refine",
    "evaluate",
    "mask_area",
    "mask_centroid",
    "pearson",
    "rle_decode",
    "rle_encode",
    "student_t_sf",
    "study",
    "synth_video",
    "synth_write",
    "ttest",
]


def _config(config):
    return "" if config is None else _json.dumps(config)


def analyze(masks, detections, phase, config=None):
    """Kinematics report for one video given the three stream files."""
    return _json.loads(
        _iolkin.analyze_files(_os.fspath(masks), _os.fspath(detections), _os.fspath(phase), _config(config))
    )


def analyze_text(masks_jsonl, detections_jsonl, phase_csv, config=None):
    """Kinematics report for one video given the stream contents."""
    return _json.loads(_iolkin.analyze_text(masks_jsonl, detections_jsonl, phase_csv, _config(config)))


def study(manifest, config=None):
    """Cross-brand study. Returns (report dict, boxplot CSV text)."""
    report, boxplots = _iolkin.study(_os.fspath(manifest), _config(config))
    return _json.loads(report), boxplots


def evaluate(pred_text, gt_text, config=None):
    """Backend metrics for two mask streams or two detection streams."""
    return _json.loads(_iolkin.evaluate(pred_text, gt_text, _config(config)))


def synth_video(spec=None):
    """Renders one synthetic video. Returns the stream texts and the truth dict."""
    out = _iolkin.synth_video(_json.dumps(spec or {}))
    out["truth"] = _json.loads(out.pop("truth_json"))
    return out


def synth_write(spec, out_dir):
    """Writes a synthetic video, or a study bundle when spec has "brands"."""
    _iolkin.synth_write(_json.dumps(spec), _os.fspath(out_dir))
