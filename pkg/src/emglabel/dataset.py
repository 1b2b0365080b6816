"""Labeled segments and the line-delimited dataset file they live in.

A dataset file is JSON Lines: the first record carries format version,
config hash and per-action extraction provenance; every following line is
one segment with its action label, stream interval, match distance, the
five EMG slices and the three per-sample angle target slices. Numbers are
emitted via repr so files round-trip bit-exactly and identical runs produce
identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InternalConsistencyError, InvalidInputError
from .ingest import MergedRecording
from .matching import Segment

FORMAT_TAG = "emglabel-dataset-v1"


@dataclass(frozen=True)
class LabeledSegment:
    """One extracted repetition with its labels attached."""

    action_name: str
    start_index: int
    end_index: int
    dtw_distance: float
    emg: np.ndarray  # (len, 5)
    angle_targets: np.ndarray  # (len, 3)

    def __post_init__(self) -> None:
        emg = np.asarray(self.emg, dtype=np.float64)
        ang = np.asarray(self.angle_targets, dtype=np.float64)
        span = self.end_index - self.start_index
        if span <= 0:
            raise InvalidInputError("segment must have positive length")
        if emg.shape != (span, 5) or ang.shape != (span, 3):
            raise InvalidInputError(
                f"slice shapes {emg.shape}/{ang.shape} do not match span {span}"
            )
        object.__setattr__(self, "emg", emg)
        object.__setattr__(self, "angle_targets", ang)


@dataclass(frozen=True)
class LabeledDataset:
    """All labeled segments of a run plus extraction provenance."""

    segments: tuple[LabeledSegment, ...]
    config_hash: str = ""
    provenance: dict = field(default_factory=dict)  # per action: template/extraction info

    def __len__(self) -> int:
        return len(self.segments)

    def actions(self) -> list[str]:
        seen: list[str] = []
        for s in self.segments:
            if s.action_name not in seen:
                seen.append(s.action_name)
        return seen


def label_segments(
    segments: list[Segment],
    recording: MergedRecording,
    action_name: str,
    config_hash: str = "",
    provenance: dict | None = None,
) -> LabeledDataset:
    """Copy the 8 channel slices for each segment; no resampling, ever."""
    labeled = []
    n = len(recording)
    for seg in segments:
        if not (0 <= seg.start_index < seg.end_index <= n):
            raise InternalConsistencyError(
                f"segment [{seg.start_index}, {seg.end_index}) outside recording "
                f"of {n} rows"
            )
        labeled.append(
            LabeledSegment(
                action_name=action_name,
                start_index=seg.start_index,
                end_index=seg.end_index,
                dtw_distance=seg.dtw_distance,
                emg=recording.emg[seg.start_index : seg.end_index].copy(),
                angle_targets=recording.angles[seg.start_index : seg.end_index].copy(),
            )
        )
    prov = {action_name: provenance} if provenance else {}
    return LabeledDataset(tuple(labeled), config_hash=config_hash, provenance=prov)


def merge_datasets(datasets: list[LabeledDataset]) -> LabeledDataset:
    segments: list[LabeledSegment] = []
    provenance: dict = {}
    config_hash = ""
    for ds in datasets:
        segments.extend(ds.segments)
        provenance.update(ds.provenance)
        config_hash = config_hash or ds.config_hash
    return LabeledDataset(tuple(segments), config_hash=config_hash, provenance=provenance)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_dataset(ds: LabeledDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = {
            "format": FORMAT_TAG,
            "config_hash": ds.config_hash,
            "provenance": ds.provenance,
            "segment_count": len(ds),
        }
        fh.write(_dumps(header) + "\n")
        for s in ds.segments:
            rec = {
                "action": s.action_name,
                "start_index": s.start_index,
                "end_index": s.end_index,
                "dtw_distance": s.dtw_distance,
                "emg": [s.emg[:, ch].tolist() for ch in range(5)],
                "angles": [s.angle_targets[:, k].tolist() for k in range(3)],
            }
            fh.write(_dumps(rec) + "\n")


def read_dataset(path) -> LabeledDataset:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first:
            raise InvalidInputError(f"{path}: empty dataset file")
        header = json.loads(first)
        if header.get("format") != FORMAT_TAG:
            raise InvalidInputError(f"{path}: not a {FORMAT_TAG} file")
        segments = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            emg = np.array(rec["emg"], dtype=np.float64).T
            ang = np.array(rec["angles"], dtype=np.float64).T
            segments.append(
                LabeledSegment(
                    action_name=rec["action"],
                    start_index=int(rec["start_index"]),
                    end_index=int(rec["end_index"]),
                    dtw_distance=float(rec["dtw_distance"]),
                    emg=emg.reshape(-1, 5),
                    angle_targets=ang.reshape(-1, 3),
                )
            )
    return LabeledDataset(
        tuple(segments),
        config_hash=header.get("config_hash", ""),
        provenance=header.get("provenance", {}),
    )
