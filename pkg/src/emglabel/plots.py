"""Plot-data emission: CSV series plus rendered PNG figures.

Every figure the toolkit can show is backed by a CSV with a fixed, stable
schema (schema_version 1, recorded in manifest.json) so external tooling
can replot without parsing our figures:

  smoothing.csv          t, raw, denoised           (scan channel)
  distance_<action>.csv  index, position, distance, normalized, is_minimum
  segments.csv           action, segment, row_index, t, elbow

The PNGs render the same data with matplotlib's Agg backend.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .config import PipelineConfig, config_hash, load_template
from .ingest import MergedRecording
from .pipeline import SCAN_CHANNEL, ActionScan, denoise_recording, scan_action

SCHEMA_VERSION = 1


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_plot_data(
    cfg: PipelineConfig,
    recording: MergedRecording,
    out_dir,
    render: bool = True,
) -> dict:
    """Run the pipeline stages and drop the figure-backing files in out_dir.

    Returns the manifest (also written as manifest.json).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []

    raw_elbow = recording.channel(SCAN_CHANNEL)
    denoised = denoise_recording(recording, cfg)
    den_elbow = denoised.channel(SCAN_CHANNEL)

    _write_csv(
        out / "smoothing.csv",
        ["t", "raw", "denoised"],
        (
            [repr(float(t)), repr(float(r)), repr(float(d))]
            for t, r, d in zip(recording.t, raw_elbow.samples, den_elbow.samples)
        ),
    )
    files.append("smoothing.csv")

    scans: dict[str, ActionScan] = {}
    for action_cfg in cfg.actions:
        template = load_template(action_cfg, cfg.mdtw.max_distance)
        scan = scan_action(denoised, template, cfg)
        scans[action_cfg.name] = scan
        d = scan.profile.distances
        span = float(d.max() - d.min())
        norm = (d - d.min()) / span if span > 0 else np.zeros_like(d)
        min_set = set(scan.minima)
        name = f"distance_{action_cfg.name}.csv"
        _write_csv(
            out / name,
            ["index", "position", "distance", "normalized", "is_minimum"],
            (
                [i, int(scan.profile.positions[i]), repr(float(d[i])),
                 repr(float(norm[i])), int(i in min_set)]
                for i in range(len(d))
            ),
        )
        files.append(name)

    seg_rows = []
    for action_name, scan in scans.items():
        for k, seg in enumerate(scan.segments):
            for i in range(seg.start_index, seg.end_index):
                seg_rows.append(
                    [action_name, k, i, repr(float(denoised.t[i])),
                     repr(float(denoised.angles[i, 1]))]
                )
    _write_csv(out / "segments.csv",
               ["action", "segment", "row_index", "t", "elbow"], seg_rows)
    files.append("segments.csv")

    if render:
        files += render_figures(out, recording, denoised, scans)

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config_hash(cfg),
        "files": files,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest


def render_figures(
    out: Path,
    raw: MergedRecording,
    denoised: MergedRecording,
    scans: dict[str, ActionScan],
) -> list[str]:
    written: list[str] = []

    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.plot(raw.t, raw.angles[:, 1], lw=0.6, alpha=0.6, label="raw")
    ax.plot(denoised.t, denoised.angles[:, 1], lw=1.2, label="denoised")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("elbow angle [deg]")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "fig_smoothing.png", dpi=120)
    plt.close(fig)
    written.append("fig_smoothing.png")

    for action, scan in scans.items():
        d = scan.profile.distances
        fig, ax = plt.subplots(figsize=(9, 3.2))
        ax.plot(scan.profile.positions, d, lw=0.8)
        mpos = [int(scan.profile.positions[m]) for m in scan.minima]
        ax.plot(mpos, d[scan.minima], "v", ms=6, label="detected minima")
        ax.set_xlabel("window start [samples]")
        ax.set_ylabel("DTW distance")
        ax.set_title(action, fontsize=9)
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        name = f"fig_distance_{action}.png"
        fig.savefig(out / name, dpi=120)
        plt.close(fig)
        written.append(name)

    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.plot(denoised.t, denoised.angles[:, 1], lw=0.8, color="0.4")
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for ci, (action, scan) in enumerate(scans.items()):
        for k, seg in enumerate(scan.segments):
            ax.axvspan(
                denoised.t[seg.start_index],
                denoised.t[seg.end_index - 1],
                alpha=0.25,
                color=colors[ci % len(colors)],
                label=action if k == 0 else None,
            )
    ax.set_xlabel("time [s]")
    ax.set_ylabel("elbow angle [deg]")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "fig_segments.png", dpi=120)
    plt.close(fig)
    written.append("fig_segments.png")
    return written


def render_cv_figure(out_path, per_fold: list[float], mean: float, std: float,
                     eval_accuracy: float | None = None) -> None:
    """Bar chart of per-fold CV accuracy with the mean +- std band."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    xs = np.arange(1, len(per_fold) + 1)
    ax.bar(xs, per_fold, width=0.6, label="fold accuracy")
    ax.axhline(mean, color="k", lw=1, label=f"mean {mean:.3f}")
    ax.axhspan(mean - std, mean + std, color="k", alpha=0.12)
    if eval_accuracy is not None:
        ax.axhline(eval_accuracy, color="C3", lw=1.2, ls="--",
                   label=f"held-out {eval_accuracy:.3f}")
    ax.set_xlabel("fold")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
