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


import json

import numpy as np
import pytest
from scipy import stats as sps

import iolkin


def test_rle_round_trip_and_background_first():
    rng = np.random.default_rng(3)
    for _ in range(50):
        h, w = rng.integers(1, 20, size=2)
        mask = (rng.random((h, w)) < rng.random()).astype(np.uint8)
        rle = iolkin.rle_encode(mask)
        assert sum(rle) == h * w
        assert np.array_equal(iolkin.rle_decode(rle, int(w), int(h)), mask)
    assert iolkin.rle_encode(np.array([[1, 1, 0, 1]], dtype=np.uint8)) == [0, 2, 1, 1]


def test_rle_decode_rejects_bad_lengths():
    with pytest.raises(iolkin.IolkinError) as err:
        iolkin.rle_decode([3], 2, 2)
    assert err.value.code == "LengthMismatch"


def test_convex_refine_fills_a_notch():
    yy, xx = np.mgrid[0:41, 0:41]
    disk = ((xx - 20) ** 2 + (yy - 20) ** 2 <= 15**2).astype(np.uint8)
    notched = disk.copy()
    notched[18:23, 30:36] = 0
    refined = iolkin.convex_refine(notched)
    assert np.all(refined >= notched)
    assert abs(iolkin.mask_area(refined) - disk.sum()) / disk.sum() < 0.03
    cx, cy = iolkin.mask_centroid(refined)
    assert abs(cx - 20) < 1 and abs(cy - 20) < 1


def test_statistics_match_scipy():
    rng = np.random.default_rng(11)
    for _ in range(100):
        x = rng.normal(0, 1, size=rng.integers(3, 30))
        y = 0.5 * x + rng.normal(0, 1, size=x.size)
        r, p = iolkin.pearson(x.tolist(), y.tolist())
        ref = sps.pearsonr(x, y)
        assert r == pytest.approx(ref.statistic, abs=1e-12)
        assert p == pytest.approx(ref.pvalue, abs=1e-9)
        a = rng.normal(0, 1, size=rng.integers(2, 25))
        b = rng.normal(0.7, 1, size=rng.integers(2, 25))
        t = iolkin.ttest(a.tolist(), b.tolist())
        ref = sps.ttest_ind(a, b, equal_var=True)
        assert t["statistic"] == pytest.approx(ref.statistic, abs=1e-10)
        assert t["p_value"] == pytest.approx(ref.pvalue, abs=1e-9)
        assert t["dof"] == a.size + b.size - 2
    assert iolkin.student_t_sf(0.0, 7) == 0.5


def test_synth_analyze_recovers_truth():
    spec = {"seed": 5, "lens": {"unfold_plateau": 100, "orientation": [[0, 0], [150, 0], [300, 24]]}}
    video = iolkin.synth_video(spec)
    report = iolkin.analyze_text(video["masks_jsonl"], video["detections_jsonl"], video["phase_csv"])
    truth = video["truth"]
    assert report["post_implantation_start_frame"] == truth["post_implantation_start_frame"]
    assert abs(report["t_u_frames"] - truth["t_u_frames"]) <= 8
    assert report["rotation_deg"] == pytest.approx(truth["rotation_deg"], abs=max(2.0, 0.05 * truth["rotation_deg"]))


def test_files_study_and_eval(tmp_path):
    iolkin.synth_write({"seed": 2}, tmp_path / "v")
    report = iolkin.analyze(tmp_path / "v" / "masks.jsonl", tmp_path / "v" / "detections.jsonl",
                            tmp_path / "v" / "phase.csv", config={"instability_mode": "displacement"})
    assert report["instability_mode"] == "displacement"

    study_spec = {"seed": 4, "brands": [{"name": "a", "videos": 3, "rotation_mean_deg": 5},
                                        {"name": "b", "videos": 3, "rotation_mean_deg": 25}]}
    iolkin.synth_write(study_spec, tmp_path / "s")
    result, boxplots = iolkin.study(tmp_path / "s" / "manifest.json")
    assert [b["name"] for b in result["brands"]] == ["a", "b"]
    assert boxplots.startswith("brand,measure,n,")

    dets = (tmp_path / "v" / "detections.jsonl").read_text()
    metrics = iolkin.evaluate(dets, dets)
    assert metrics["map"] == 1.0


def test_errors_carry_stage_and_code():
    with pytest.raises(iolkin.IolkinError) as err:
        iolkin.analyze_text("not json\n", "", "frame,prob\n")
    assert err.value.stage == "ingest"
    assert err.value.code == "ParseError"
    assert err.value.line == 1
    with pytest.raises(iolkin.IolkinError) as err:
        iolkin.synth_video({"n_frames": -1})
    assert err.value.code == "SpecInvalid"
    with pytest.raises(iolkin.IolkinError):
        iolkin.analyze_text("", "", "", config={"no_such_key": 1})
