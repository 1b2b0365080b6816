import numpy as np
import pytest

from emglabel.errors import InvalidParameterError
from emglabel.synth import (
    ActionSpec,
    SyntheticSpec,
    bicep_curl_action,
    generate_synthetic,
    lateral_raise_action,
    read_ground_truth,
    write_ground_truth,
)


def test_occurrence_count_and_disjointness():
    rec, truths = generate_synthetic(
        SyntheticSpec(actions=(bicep_curl_action(8),), seed=7)
    )
    occ = truths[0].occurrences
    assert len(occ) == 8
    for (s0, e0), (s1, e1) in zip(occ, occ[1:]):
        assert s0 < e0 <= s1 < e1
    assert occ[-1][1] <= len(rec)


def test_determinism():
    spec = SyntheticSpec(actions=(bicep_curl_action(5), lateral_raise_action(4)), seed=3)
    a_rec, a_truth = generate_synthetic(spec)
    b_rec, b_truth = generate_synthetic(spec)
    assert np.array_equal(a_rec.emg, b_rec.emg)
    assert np.array_equal(a_rec.angles, b_rec.angles)
    assert [t.occurrences for t in a_truth] == [t.occurrences for t in b_truth]


def test_different_seeds_differ():
    s1 = generate_synthetic(SyntheticSpec(actions=(bicep_curl_action(4),), seed=0))[0]
    s2 = generate_synthetic(SyntheticSpec(actions=(bicep_curl_action(4),), seed=1))[0]
    assert not np.array_equal(s1.angles, s2.angles)


def test_noise_free_unjittered_pulses_match_template():
    spec = SyntheticSpec(
        actions=(bicep_curl_action(3),),
        seed=0,
        angle_noise_deg=0.0,
        duration_jitter=0.0,
        amplitude_jitter=0.0,
    )
    rec, truths = generate_synthetic(spec)
    gt = truths[0]
    tpl = gt.template.samples
    for s, e in gt.occurrences:
        assert e - s == len(tpl)
        assert np.allclose(rec.angles[s:e, 1], tpl, atol=1e-12)


def test_decoys_are_not_recorded_as_occurrences():
    rec, truths = generate_synthetic(SyntheticSpec(actions=(bicep_curl_action(4),), seed=2))
    gt = truths[0]
    # there is motion before the first and after the last recorded occurrence
    first, last = gt.occurrences[0][0], gt.occurrences[-1][1]
    elbow = rec.angles[:, 1]
    base = 20.0
    assert elbow[:first].max() > base + 20.0
    assert elbow[last:].max() > base + 20.0


def test_ground_truth_file_roundtrip(tmp_path):
    _, truths = generate_synthetic(
        SyntheticSpec(actions=(bicep_curl_action(3), lateral_raise_action(2)), seed=1)
    )
    path = tmp_path / "truth.csv"
    write_ground_truth(truths, path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 5
    assert lines[0].count(",") == 2
    back = read_ground_truth(path)
    for gt in truths:
        assert back[gt.action_name] == list(gt.occurrences)


def test_emg_bands_differ_between_actions():
    spec = SyntheticSpec(
        actions=(bicep_curl_action(6), lateral_raise_action(6)), seed=4
    )
    rec, truths = generate_synthetic(spec)

    def median_freq(x):
        p = np.abs(np.fft.rfft(x * np.hanning(len(x)))) ** 2
        f = np.fft.rfftfreq(len(x), 1 / 256.0)
        return f[np.searchsorted(np.cumsum(p), p.sum() / 2)]

    # channel 1 is bursty for the curl (low band), channel 5 for the raise (high)
    s, e = truths[0].occurrences[0]
    curl_mdf = median_freq(rec.emg[s:e, 0])
    s, e = truths[1].occurrences[0]
    raise_mdf = median_freq(rec.emg[s:e, 4])
    assert curl_mdf < 70.0 < raise_mdf


def test_validation():
    with pytest.raises(InvalidParameterError):
        ActionSpec(name="x", repetitions=0)
    with pytest.raises(InvalidParameterError):
        SyntheticSpec(actions=())


def test_timestamps_strictly_increase_at_sample_rate():
    rec, _ = generate_synthetic(SyntheticSpec(actions=(bicep_curl_action(3),), seed=6))
    dt = np.diff(rec.t)
    assert np.all(dt > 0)
    assert np.all(np.abs(dt - 1.0 / 256.0) < 1e-6)
