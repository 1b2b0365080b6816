import numpy as np
import pytest

from emglabel.config import ActionConfig, PipelineConfig, write_template
from emglabel.ingest import MergedRecording
from emglabel.pipeline import denoise_recording, run_pipeline
from emglabel.synth import (
    SyntheticSpec,
    bicep_curl_action,
    generate_synthetic,
    lateral_raise_action,
)


@pytest.fixture(scope="module")
def two_action_setup(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pipe")
    spec = SyntheticSpec(
        actions=(bicep_curl_action(8), lateral_raise_action(8)),
        seed=7,
        angle_noise_deg=3.0,
    )
    rec, truths = generate_synthetic(spec)
    actions = []
    for gt in truths:
        path = tmp / f"tpl_{gt.action_name}.json"
        write_template(gt.template, gt.action_name, path)
        actions.append(
            ActionConfig(name=gt.action_name, template_path=str(path),
                         expected_count=len(gt.occurrences))
        )
    cfg = PipelineConfig(actions=tuple(actions), seed=7)
    return cfg, rec, truths


def test_two_action_recording_yields_8_plus_8(two_action_setup):
    cfg, rec, truths = two_action_setup
    ds, report = run_pipeline(cfg, rec)
    assert len(ds) == 16
    per_action = {a: sum(s.action_name == a for s in ds.segments) for a in ds.actions()}
    assert per_action == {"elevated_bicep_curl": 8, "lateral_arm_raise": 8}
    for name, entry in report["actions"].items():
        assert entry["error"] is None
        assert entry["segments"] == 8
    assert report["total_segments"] == 16


def test_segments_lie_in_own_action_block(two_action_setup):
    cfg, rec, truths = two_action_setup
    ds, _ = run_pipeline(cfg, rec)
    blocks = {
        gt.action_name: (gt.occurrences[0][0], gt.occurrences[-1][1])
        for gt in truths
    }
    margin = 60
    for seg in ds.segments:
        lo, hi = blocks[seg.action_name]
        assert seg.start_index >= lo - margin
        assert seg.end_index <= hi + margin


def test_too_short_recording_reported_per_action(two_action_setup):
    cfg, rec, _ = two_action_setup
    short = MergedRecording(t=rec.t[:100], emg=rec.emg[:100], angles=rec.angles[:100])
    ds, report = run_pipeline(cfg, short)
    assert len(ds) == 0
    for entry in report["actions"].values():
        assert entry["error"] is not None
        assert "InsufficientDataError" in entry["error"]


def test_partial_results_when_one_action_fails(two_action_setup, tmp_path):
    cfg, rec, truths = two_action_setup
    broken = ActionConfig(
        name="ghost", template_path=str(tmp_path / "missing.json"), expected_count=2
    )
    cfg2 = PipelineConfig(actions=cfg.actions + (broken,), seed=7)
    ds, report = run_pipeline(cfg2, rec)
    assert len(ds) == 16  # the two healthy actions still labeled
    assert report["actions"]["ghost"]["error"] is not None


def test_denoise_shapes_and_noise_reduction():
    spec = SyntheticSpec(actions=(bicep_curl_action(4),), seed=1, angle_noise_deg=3.0)
    rec, truths = generate_synthetic(spec)
    cfg = PipelineConfig()
    den = denoise_recording(rec, cfg)
    assert den.emg.shape == rec.emg.shape
    assert den.angles.shape == rec.angles.shape
    assert np.array_equal(den.t, rec.t)
    # angle channels come out smoother than they went in
    for k in range(3):
        assert np.abs(np.diff(den.angles[:, k])).mean() < np.abs(
            np.diff(rec.angles[:, k])
        ).mean()
    # 60 Hz is gone from the EMG
    tone = np.sin(2 * np.pi * 60 * rec.t)
    spiked = MergedRecording(t=rec.t, emg=rec.emg + 50 * tone[:, None], angles=rec.angles)
    den2 = denoise_recording(spiked, cfg)
    spec_amp = lambda x: np.abs(np.fft.rfft(x[-1024:]))[
        int(round(60 * 1024 / 256.0))
    ]
    assert spec_amp(den2.emg[:, 0]) < 0.05 * spec_amp(spiked.emg[:, 0])


def test_determinism_end_to_end(two_action_setup):
    cfg, rec, _ = two_action_setup
    d1, r1 = run_pipeline(cfg, rec)
    d2, r2 = run_pipeline(cfg, rec)
    assert r1 == r2
    for s1, s2 in zip(d1.segments, d2.segments):
        assert (s1.start_index, s1.end_index, s1.dtw_distance) == (
            s2.start_index,
            s2.end_index,
            s2.dtw_distance,
        )
        assert np.array_equal(s1.emg, s2.emg)
