"""End-to-end orchestration: denoise, scan, extract, label, report.

run_pipeline is literally the composition of the stepwise stages the CLI
exposes (denoise -> segment -> label), so running them one command at a
time writes byte-identical output. Actions are processed independently; a
failure in one is reported and the others still complete.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig, config_hash, load_template
from .dataset import LabeledDataset, label_segments, merge_datasets
from .errors import EmgLabelError
from .ingest import ANGLE_CHANNELS, EMG_CHANNELS, MergedRecording
from .matching import (
    DistanceProfile,
    Template,
    detect_local_minima,
    extract_segments,
    mdtw_scan,
)
from .signals import TimeSeries, bandpass_filter, notch_filter
from .ssa import ssa_denoise

SCAN_CHANNEL = "elbow"  # templates are elbow-angle traces


def denoise_recording(rec: MergedRecording, cfg: PipelineConfig) -> MergedRecording:
    """Band-pass + notch every EMG channel; SSA-smooth every angle channel."""
    f = cfg.filters
    emg = np.empty_like(rec.emg)
    for ch in range(len(EMG_CHANNELS)):
        s = TimeSeries(rec.emg[:, ch], rec.sample_rate_hz)
        s = bandpass_filter(s, f.band_low_hz, f.band_high_hz, f.band_order)
        s = notch_filter(s, f.notch_hz, f.notch_q)
        emg[:, ch] = s.samples
    angles = np.empty_like(rec.angles)
    for k in range(len(ANGLE_CHANNELS)):
        s = TimeSeries(rec.angles[:, k], rec.sample_rate_hz)
        angles[:, k] = ssa_denoise(s, cfg.ssa.window_len, cfg.ssa.rank).samples
    return MergedRecording(
        t=rec.t.copy(),
        emg=emg,
        angles=angles,
        sample_rate_hz=rec.sample_rate_hz,
        dropped_prefix=rec.dropped_prefix,
    )


@dataclass(frozen=True)
class ActionScan:
    """Everything the segment stage produces for one action."""

    template: Template
    profile: DistanceProfile
    minima: list[int]
    segments: tuple
    shortfall: int
    discarded: int
    diagnostics: str


def scan_action(rec: MergedRecording, template: Template, cfg: PipelineConfig) -> ActionScan:
    stream = rec.channel(SCAN_CHANNEL)
    profile = mdtw_scan(
        template, stream, squared_cost=cfg.mdtw.squared_cost,
        window_factor=cfg.mdtw.window_factor,
    )
    minima = detect_local_minima(profile, cfg.mdtw.threshold, cfg.mdtw.max_depth)
    res = extract_segments(profile, minima, template, stream,
                           squared_cost=cfg.mdtw.squared_cost)
    return ActionScan(
        template=template,
        profile=profile,
        minima=minima,
        segments=res.segments,
        shortfall=res.shortfall,
        discarded=res.discarded,
        diagnostics=res.diagnostics,
    )


def run_pipeline(
    cfg: PipelineConfig,
    recording: MergedRecording,
    denoise: bool = True,
) -> tuple[LabeledDataset, dict]:
    """Full per-action pipeline over one recording.

    Returns the merged labeled dataset plus a JSON-able report with
    per-action counts, distances and discard diagnostics. A module error
    under one action is captured in the report; other actions still run.
    """
    chash = config_hash(cfg)
    rec = denoise_recording(recording, cfg) if denoise else recording
    datasets: list[LabeledDataset] = []
    report: dict = {"config_hash": chash, "rows": len(rec), "actions": {}}
    for action_cfg in cfg.actions:
        entry: dict = {"stage": None, "error": None}
        try:
            entry["stage"] = "load-template"
            template = load_template(action_cfg, cfg.mdtw.max_distance)
            entry["stage"] = "scan"
            scan = scan_action(rec, template, cfg)
            entry["stage"] = "label"
            ds = label_segments(
                list(scan.segments),
                rec,
                action_cfg.name,
                config_hash=chash,
                provenance={
                    "template_len": len(template.series),
                    "expected_count": template.expected_count,
                    "distances": [s.dtw_distance for s in scan.segments],
                },
            )
            datasets.append(ds)
            entry.update(
                {
                    "stage": "done",
                    "segments": len(scan.segments),
                    "minima": len(scan.minima),
                    "distances": [s.dtw_distance for s in scan.segments],
                    "shortfall": scan.shortfall,
                    "discarded": scan.discarded,
                    "diagnostics": scan.diagnostics,
                }
            )
        except EmgLabelError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        report["actions"][action_cfg.name] = entry
    merged = merge_datasets(datasets) if datasets else LabeledDataset((), chash, {})
    report["total_segments"] = len(merged)
    return merged, report
