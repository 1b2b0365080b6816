"""Recording I/O, datagram decoding, and stream merging.

A merged recording is the 8-channel product every downstream stage works
on: five sEMG channels sampled at 256 Hz plus the three joint angles held
or interpolated onto the same time base. Recordings round-trip through a
plain CSV format (header ``t,ch1..ch5,shoulder,elbow,wrist``); angle frames
travel as one-line ASCII datagrams.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    FormatError,
    InvalidInputError,
    PacketFormatError,
    UnmergeableError,
)
from .kinematics import AngleFrame
from .signals import TimeSeries

SAMPLE_RATE_HZ = 256.0
EMG_CHANNELS = ("ch1", "ch2", "ch3", "ch4", "ch5")
ANGLE_CHANNELS = ("shoulder", "elbow", "wrist")
CSV_HEADER = ("t",) + EMG_CHANNELS + ANGLE_CHANNELS


@dataclass(frozen=True)
class MergedRecording:
    """Aligned 8-channel stream on a common 256 Hz time base."""

    t: np.ndarray  # (n,) timestamps, seconds
    emg: np.ndarray  # (n, 5)
    angles: np.ndarray  # (n, 3) shoulder, elbow, wrist in degrees
    sample_rate_hz: float = SAMPLE_RATE_HZ
    dropped_prefix: int = 0  # EMG samples discarded before the first angle frame
    channel_names: tuple[str, ...] = EMG_CHANNELS + ANGLE_CHANNELS

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=np.float64)
        emg = np.asarray(self.emg, dtype=np.float64)
        angles = np.asarray(self.angles, dtype=np.float64)
        if emg.shape != (len(t), 5) or angles.shape != (len(t), 3):
            raise InvalidInputError(
                f"shape mismatch: t={t.shape}, emg={emg.shape}, angles={angles.shape}"
            )
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "emg", emg)
        object.__setattr__(self, "angles", angles)

    def __len__(self) -> int:
        return len(self.t)

    def channel(self, name: str) -> TimeSeries:
        """One named channel as a TimeSeries (t0 = first row timestamp)."""
        t0 = float(self.t[0]) if len(self.t) else 0.0
        if name in EMG_CHANNELS:
            data = self.emg[:, EMG_CHANNELS.index(name)]
        elif name in ANGLE_CHANNELS:
            data = self.angles[:, ANGLE_CHANNELS.index(name)]
        else:
            raise InvalidInputError(f"unknown channel {name!r}")
        return TimeSeries(data.copy(), self.sample_rate_hz, t0)


def write_recording(rec: MergedRecording, path) -> None:
    """Write CSV with repr-formatted floats so values round-trip exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i in range(len(rec)):
            row = [repr(float(rec.t[i]))]
            row += [repr(float(v)) for v in rec.emg[i]]
            row += [repr(float(v)) for v in rec.angles[i]]
            w.writerow(row)


def parse_recording(path) -> MergedRecording:
    """Parse a recording CSV; rejects bad headers, fields and timestamps."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected header line 1") from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            missing = [c for c in CSV_HEADER if c not in header]
            detail = f"missing column(s) {missing}" if missing else f"got {header}"
            raise FormatError(f"{path}: line 1: malformed header, {detail}")
        t, emg, angles = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise FormatError(
                    f"{path}: line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}"
                )
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-numeric field") from None
            t.append(vals[0])
            emg.append(vals[1:6])
            angles.append(vals[6:9])
    t_arr = np.array(t)
    if len(t_arr) > 1 and not np.all(np.diff(t_arr) > 0):
        bad = int(np.argmax(np.diff(t_arr) <= 0))
        raise DataError(f"{path}: non-monotonic timestamp at row index {bad + 1}")
    return MergedRecording(t=t_arr, emg=np.array(emg).reshape(-1, 5),
                           angles=np.array(angles).reshape(-1, 3))


def decode_angle_packet(payload: bytes) -> AngleFrame:
    """Decode one ``ts,shoulder,elbow,wrist`` ASCII datagram.

    Angles outside [0, 180] are clamped and the frame flagged; anything
    structurally wrong raises PacketFormatError (callers drop and count).
    """
    try:
        text = payload.decode("ascii")
    except UnicodeDecodeError:
        raise PacketFormatError("packet is not ASCII") from None
    fields = text.strip().split(",")
    if len(fields) != 4:
        raise PacketFormatError(f"expected 4 fields, got {len(fields)}")
    try:
        ts, shoulder, elbow, wrist = (float(f) for f in fields)
    except ValueError:
        raise PacketFormatError(f"unparsable number in packet {text.strip()!r}") from None
    if not all(np.isfinite(v) for v in (ts, shoulder, elbow, wrist)):
        raise PacketFormatError("non-finite value in packet")
    clamped = not all(0.0 <= v <= 180.0 for v in (shoulder, elbow, wrist))
    clip = lambda v: min(180.0, max(0.0, v))
    return AngleFrame(t=ts, shoulder_deg=clip(shoulder), elbow_deg=clip(elbow),
                      wrist_deg=clip(wrist), clamped=clamped)


def encode_angle_packet(frame: AngleFrame) -> bytes:
    """Inverse of decode_angle_packet for in-range frames."""
    return (
        f"{frame.t!r},{frame.shoulder_deg!r},{frame.elbow_deg!r},{frame.wrist_deg!r}\n"
    ).encode("ascii")


def merge_streams(
    emg: list[TimeSeries],
    frames: list[AngleFrame],
    interpolate: bool = False,
) -> MergedRecording:
    """Merge 5 EMG channels with slow angle frames onto the EMG time base.

    Angle columns are filled by zero-order hold of the latest frame at or
    before each EMG sample time (linear interpolation optional). EMG
    samples before the first frame are dropped and counted; EMG values are
    carried over bit-exactly, never resampled.
    """
    if len(emg) != 5:
        raise InvalidInputError(f"expected 5 EMG channels, got {len(emg)}")
    n = len(emg[0])
    rate = emg[0].sample_rate_hz
    t0 = emg[0].t0
    for ch in emg[1:]:
        if len(ch) != n or ch.sample_rate_hz != rate or ch.t0 != t0:
            raise InvalidInputError("EMG channels must share length, rate and t0")
    if not frames:
        raise UnmergeableError("no angle frames to merge")
    frame_t = np.array([f.t for f in frames])
    if np.any(np.diff(frame_t) < 0):
        raise InvalidInputError("angle frames must be time-sorted")

    t = emg[0].times()
    keep = t >= frame_t[0]
    dropped = int(np.sum(~keep))
    t = t[keep]
    emg_mat = np.column_stack([ch.samples[keep] for ch in emg])

    frame_vals = np.array([[f.shoulder_deg, f.elbow_deg, f.wrist_deg] for f in frames])
    if interpolate:
        angles = np.column_stack(
            [np.interp(t, frame_t, frame_vals[:, k]) for k in range(3)]
        )
    else:
        idx = np.searchsorted(frame_t, t, side="right") - 1
        angles = frame_vals[idx]
    return MergedRecording(t=t, emg=emg_mat, angles=angles, sample_rate_hz=rate,
                           dropped_prefix=dropped)
