"""Deterministic synthetic recordings with known repetition boundaries.

Each action block mimics one exercise set: a short rest, a reduced-amplitude
warm-up motion, the counted repetitions (trapezoidal angle pulses with
jittered duration, amplitude and inter-pulse pause), a final full-size
motion that closes the last repetition's boundary, and a sustained raised
hold that marks the end of the set. Ground truth records the exact pulse
boundaries of the counted repetitions only; warm-up and end markers are
deliberate decoys the extraction stage must reject.

EMG channels carry a noise floor, band-limited bursts amplitude-modulated
by each motion pulse (band and per-channel gain differ per action), and a
periodic heart-pulse artifact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .ingest import SAMPLE_RATE_HZ, MergedRecording
from .matching import Template
from .signals import TimeSeries, bandpass_filter

LEAD_DECOY_AMP = 0.6  # warm-up motion, relative to the action amplitude
HOLD_WALL_AMP = 0.6  # sustained end-of-set hold level
SHOULDER_BASE_DEG = 10.0
WRIST_BASE_DEG = 160.0
HEART_AMP = 3.0


@dataclass(frozen=True)
class ActionSpec:
    """Shape and EMG signature of one exercise."""

    name: str
    repetitions: int
    pulse_duration_s: float = 0.78125  # 200 samples at 256 Hz
    pulse_amplitude_deg: float = 90.0
    rise_fraction: float = 0.15
    elbow_base_deg: float = 20.0
    shoulder_pulses: bool = False  # raise moves the shoulder, curl does not
    emg_band_hz: tuple[float, float] = (30.0, 60.0)
    emg_channel_gains: tuple[float, ...] = (1.5, 1.2, 1.0, 0.4, 0.3)

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise InvalidParameterError("repetitions must be >= 1")

    @property
    def pulse_len(self) -> int:
        return int(round(self.pulse_duration_s * SAMPLE_RATE_HZ))


def bicep_curl_action(repetitions: int = 8) -> ActionSpec:
    return ActionSpec(name="elevated_bicep_curl", repetitions=repetitions)


def lateral_raise_action(repetitions: int = 8) -> ActionSpec:
    return ActionSpec(
        name="lateral_arm_raise",
        repetitions=repetitions,
        pulse_duration_s=1.015625,  # 260 samples: a slower motion
        pulse_amplitude_deg=70.0,
        rise_fraction=0.18,
        shoulder_pulses=True,
        emg_band_hz=(70.0, 110.0),
        emg_channel_gains=(0.3, 0.5, 1.0, 1.3, 1.6),
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """Full recipe for one synthetic recording."""

    actions: tuple[ActionSpec, ...]
    seed: int = 0
    angle_noise_deg: float = 1.0
    emg_noise_floor: float = 2.0
    emg_burst_scale: float = 10.0
    duration_jitter: float = 0.2  # bounded bell, full range +-20%
    gap_fraction: float = 0.015
    amplitude_jitter: float = 0.08
    heart_rate_hz: float = 1.2

    def __post_init__(self) -> None:
        if not self.actions:
            raise InvalidParameterError("at least one action required")
        if not (0 <= self.duration_jitter < 1):
            raise InvalidParameterError("duration_jitter must be in [0, 1)")


@dataclass(frozen=True)
class SyntheticGroundTruth:
    """Planted occurrences of one action, with the clean motion template."""

    action_name: str
    occurrences: tuple[tuple[int, int], ...]  # [start, end) row indices
    template: TimeSeries

    def __post_init__(self) -> None:
        prev_end = -1
        for s, e in self.occurrences:
            if not (prev_end <= s < e):
                raise InvalidParameterError("occurrences must be disjoint and sorted")
            prev_end = e


def motion_pulse(n: int, amplitude: float, rise_fraction: float) -> np.ndarray:
    """Rounded trapezoid: cosine rise, flat top, cosine fall."""
    tau = np.arange(n) / n
    y = np.ones(n)
    r = rise_fraction
    up = tau < r
    dn = tau > 1.0 - r
    y[up] = 0.5 * (1 - np.cos(np.pi * tau[up] / r))
    y[dn] = 0.5 * (1 + np.cos(np.pi * (tau[dn] - (1 - r)) / r))
    return amplitude * y


def action_template(action: ActionSpec) -> TimeSeries:
    """The clean nominal-duration motion-of-interest trace for an action."""
    return TimeSeries(
        action.elbow_base_deg
        + motion_pulse(action.pulse_len, action.pulse_amplitude_deg, action.rise_fraction),
        SAMPLE_RATE_HZ,
    )


def _block(action: ActionSpec, rng: np.random.Generator, spec: SyntheticSpec):
    """One exercise set: elbow trace, pulse envelope, occurrence list."""
    n = action.pulse_len
    amp = action.pulse_amplitude_deg

    def gap_len() -> int:
        return max(1, int(round(n * spec.gap_fraction * (1 + rng.uniform(-0.5, 0.5)))))

    def pulse_len() -> int:
        j = (rng.beta(3.0, 3.0) * 2 - 1) * spec.duration_jitter
        return int(round(n * (1 + j)))

    pieces: list[np.ndarray] = []  # pulse height above base, per sample
    occurrences: list[tuple[int, int]] = []
    pos = 0

    def put(piece: np.ndarray) -> None:
        nonlocal pos
        pieces.append(piece)
        pos += len(piece)

    put(np.zeros(int(0.25 * n)))
    put(motion_pulse(pulse_len(), amp * LEAD_DECOY_AMP, action.rise_fraction))
    put(np.zeros(gap_len()))
    for _ in range(action.repetitions):
        ni = pulse_len()
        a = amp * (1 - spec.amplitude_jitter * rng.random())
        occurrences.append((pos, pos + ni))
        put(motion_pulse(ni, a, action.rise_fraction))
        put(np.zeros(gap_len()))
    put(motion_pulse(pulse_len(), amp, action.rise_fraction))
    put(np.zeros(gap_len()))
    ramp = int(0.1 * n)
    wall = amp * HOLD_WALL_AMP
    put(wall * 0.5 * (1 - np.cos(np.pi * np.arange(ramp) / ramp)))
    put(np.full(2 * n, wall))
    put(wall * 0.5 * (1 + np.cos(np.pi * np.arange(ramp) / ramp)))

    elevation = np.concatenate(pieces)
    envelope = np.zeros(len(elevation))
    for s, e in occurrences:
        envelope[s:e] = elevation[s:e] / amp
    return elevation, envelope, occurrences


def _emg_channels(
    total_len: int,
    envelopes: list[tuple[slice, np.ndarray, ActionSpec]],
    rng: np.random.Generator,
    spec: SyntheticSpec,
) -> np.ndarray:
    emg = rng.normal(0.0, spec.emg_noise_floor, (total_len, 5))
    for sl, env, action in envelopes:
        n_blk = sl.stop - sl.start
        for ch in range(5):
            white = TimeSeries(rng.standard_normal(n_blk), SAMPLE_RATE_HZ)
            burst = bandpass_filter(white, *action.emg_band_hz, order=4).samples
            std = burst.std()
            if std > 0:
                burst = burst / std
            gain = spec.emg_burst_scale * action.emg_channel_gains[ch]
            emg[sl, ch] += gain * env * burst
    # heart pulse artifact: one narrow bump per beat on every channel
    t = np.arange(total_len) / SAMPLE_RATE_HZ
    period = 1.0 / spec.heart_rate_hz
    phase = (t % period) - period / 2
    heart = HEART_AMP * np.exp(-0.5 * (phase / 0.025) ** 2)
    return emg + heart[:, None]


def generate_synthetic(
    spec: SyntheticSpec,
) -> tuple[MergedRecording, list[SyntheticGroundTruth]]:
    """Build a recording plus one ground truth per action. Seed-deterministic."""
    rng = np.random.default_rng(spec.seed)

    elbow_parts, truths_raw, block_slices, envelopes_raw = [], [], [], []
    shoulder_parts = []
    offset = 0
    for action in spec.actions:
        elevation, envelope, occ = _block(action, rng, spec)
        n_blk = len(elevation)
        elbow_parts.append(action.elbow_base_deg + elevation)
        if action.shoulder_pulses:
            shoulder_parts.append(
                SHOULDER_BASE_DEG + elevation * (90.0 / action.pulse_amplitude_deg)
            )
        else:
            shoulder_parts.append(np.full(n_blk, SHOULDER_BASE_DEG))
        sl = slice(offset, offset + n_blk)
        block_slices.append(sl)
        envelopes_raw.append((sl, envelope, action))
        truths_raw.append((action, [(s + offset, e + offset) for s, e in occ]))
        offset += n_blk

    total = offset
    elbow = np.concatenate(elbow_parts)
    shoulder = np.concatenate(shoulder_parts)
    wrist = np.full(total, WRIST_BASE_DEG)

    angles = np.column_stack([shoulder, elbow, wrist])
    angles = angles + rng.normal(0.0, spec.angle_noise_deg, angles.shape)
    emg = _emg_channels(total, envelopes_raw, rng, spec)

    rec = MergedRecording(
        t=np.arange(total) / SAMPLE_RATE_HZ,
        emg=emg,
        angles=angles,
    )
    truths = [
        SyntheticGroundTruth(
            action_name=action.name,
            occurrences=tuple(occ),
            template=action_template(action),
        )
        for action, occ in truths_raw
    ]
    return rec, truths


def templates_from_truth(
    truths: list[SyntheticGroundTruth], max_distance: float | None = None
) -> list[Template]:
    return [
        Template(
            action_name=gt.action_name,
            series=gt.template,
            expected_count=len(gt.occurrences),
            max_distance=max_distance,
        )
        for gt in truths
    ]


def write_ground_truth(truths: list[SyntheticGroundTruth], path) -> None:
    """One line per occurrence: ``action,start_index,end_index``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for gt in truths:
            for s, e in gt.occurrences:
                fh.write(f"{gt.action_name},{s},{e}\n")


def read_ground_truth(path) -> dict[str, list[tuple[int, int]]]:
    out: dict[str, list[tuple[int, int]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            action, s, e = line.split(",")
            out.setdefault(action, []).append((int(s), int(e)))
    return out
