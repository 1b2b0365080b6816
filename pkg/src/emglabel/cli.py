"""Command-line interface.

Subcommands cover the whole pipeline: synth, denoise, segment, label,
featurize, train, evaluate, listen, plotdata. Exit codes: 0 success,
1 data/processing error, 2 usage or configuration error. Errors also
print one machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import queue
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .classify import (
    cross_validate,
    load_model,
    predict_labels,
    save_model,
    svm_fit,
    train_eval_split,
)
from .config import (
    ActionConfig,
    PipelineConfig,
    config_hash,
    load_config,
    load_template,
    save_config,
    write_template,
)
from .dataset import label_segments, merge_datasets, read_dataset, write_dataset
from .errors import ConfigError, EmgLabelError
from .features import (
    FeatureMatrix,
    extract_features,
    lda_rank,
    log_normalize,
    read_feature_csv,
    select_top2,
    write_feature_csv,
)
from .ingest import parse_recording, write_recording
from .matching import Segment
from .pipeline import denoise_recording, scan_action
from .synth import (
    SyntheticSpec,
    bicep_curl_action,
    generate_synthetic,
    lateral_raise_action,
    write_ground_truth,
)

SEGMENTS_FORMAT = "emglabel-segments-v1"


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def _dump_json(doc, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


# -- synth ----------------------------------------------------------------


def cmd_synth(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    actions = [bicep_curl_action(args.reps)]
    if args.actions == 2:
        actions.append(lateral_raise_action(args.reps))
    spec = SyntheticSpec(
        actions=tuple(actions), seed=args.seed, angle_noise_deg=args.noise
    )
    rec, truths = generate_synthetic(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_recording(rec, out)
    truth_path = Path(args.truth) if args.truth else out.with_suffix(".truth.csv")
    write_ground_truth(truths, truth_path)
    tpl_dir = Path(args.templates_dir) if args.templates_dir else out.parent
    tpl_dir.mkdir(parents=True, exist_ok=True)
    action_cfgs = []
    for gt in truths:
        tpl_path = tpl_dir / f"template_{gt.action_name}.json"
        write_template(gt.template, gt.action_name, tpl_path)
        action_cfgs.append(
            ActionConfig(
                name=gt.action_name,
                template_path=str(tpl_path),
                expected_count=len(gt.occurrences),
            )
        )
    if args.emit_config:
        save_config(
            PipelineConfig(actions=tuple(action_cfgs), seed=args.seed),
            args.emit_config,
        )
    print(
        f"wrote {out} ({len(rec)} rows), {truth_path}, "
        f"{len(action_cfgs)} template(s) in {tpl_dir}"
    )
    return 0


# -- denoise ---------------------------------------------------------------


def cmd_denoise(args) -> int:
    cfg = load_config(args.config)
    rec = parse_recording(args.infile)
    write_recording(denoise_recording(rec, cfg), args.out)
    print(f"wrote {args.out} ({len(rec)} rows)")
    return 0


# -- segment ---------------------------------------------------------------


def cmd_segment(args) -> int:
    cfg = load_config(args.config)
    if not cfg.actions:
        raise ConfigError("config has no actions; nothing to segment")
    rec = parse_recording(args.infile)
    doc: dict = {
        "format": SEGMENTS_FORMAT,
        "config_hash": config_hash(cfg),
        "actions": {},
    }
    failures = 0
    for action_cfg in cfg.actions:
        try:
            template = load_template(action_cfg, cfg.mdtw.max_distance)
            scan = scan_action(rec, template, cfg)
            doc["actions"][action_cfg.name] = {
                "segments": [
                    [s.start_index, s.end_index, s.dtw_distance] for s in scan.segments
                ],
                "minima": scan.minima,
                "shortfall": scan.shortfall,
                "discarded": scan.discarded,
                "diagnostics": scan.diagnostics,
            }
        except EmgLabelError as exc:
            failures += 1
            doc["actions"][action_cfg.name] = {
                "error": f"{type(exc).__name__}: {exc} (action {action_cfg.name!r}, stage segment)"
            }
            print(
                json.dumps({"error": type(exc).__name__, "action": action_cfg.name,
                            "message": str(exc)}),
                file=sys.stderr,
            )
    _dump_json(doc, args.out)
    counts = {
        name: len(entry.get("segments", []))
        for name, entry in doc["actions"].items()
    }
    print(f"wrote {args.out}: segments per action {counts}")
    return 1 if failures == len(cfg.actions) else 0


# -- label -----------------------------------------------------------------


def cmd_label(args) -> int:
    cfg = load_config(args.config)
    rec = parse_recording(args.infile)
    with open(args.segments, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != SEGMENTS_FORMAT:
        raise ConfigError(f"{args.segments}: not a {SEGMENTS_FORMAT} file")
    chash = config_hash(cfg)
    datasets = []
    for action_cfg in cfg.actions:
        entry = doc["actions"].get(action_cfg.name)
        if entry is None or "error" in entry:
            continue
        template = load_template(action_cfg, cfg.mdtw.max_distance)
        segs = [
            Segment(action_cfg.name, int(s), int(e), float(d))
            for s, e, d in entry["segments"]
        ]
        datasets.append(
            label_segments(
                segs,
                rec,
                action_cfg.name,
                config_hash=chash,
                provenance={
                    "template_len": len(template.series),
                    "expected_count": template.expected_count,
                    "distances": [sg.dtw_distance for sg in segs],
                },
            )
        )
    merged = merge_datasets(datasets)
    write_dataset(merged, args.out)
    print(f"wrote {args.out} ({len(merged)} segments)")
    return 0


# -- featurize ---------------------------------------------------------------


def cmd_featurize(args) -> int:
    slices, labels = [], []
    for path in args.infiles:
        ds = read_dataset(path)
        for seg in ds.segments:
            slices.append(seg.emg)
            labels.append(seg.action_name)
    if not slices:
        raise EmgLabelError("no segments found in the given dataset file(s)")
    wa = ssc = None
    if args.config:
        feat_cfg = load_config(args.config).features
        wa, ssc = feat_cfg.wa_threshold, feat_cfg.ssc_threshold
    m = extract_features(slices, labels, sample_rate_hz=256.0,
                         wa_threshold=wa, ssc_threshold=ssc)
    if not args.no_log:
        m = log_normalize(m)
    write_feature_csv(m, args.out)
    print(f"wrote {args.out} ({m.n_rows} rows x {len(m.columns)} features)")
    return 0


# -- train -------------------------------------------------------------------


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    m = read_feature_csv(args.features)
    cls = cfg.classifier
    labels = np.asarray(m.labels)
    train_idx, eval_idx = train_eval_split(
        m.values, labels, cls.train_fraction, seed=cfg.seed
    )
    train_m = FeatureMatrix(m.values[train_idx], tuple(labels[train_idx]), m.columns)

    rankings = {ch: lda_rank(train_m, ch, k=cls.folds, seed=cfg.seed) for ch in range(1, 6)}
    selection = select_top2(rankings)
    reduced = train_m.select(list(selection.chosen))

    cv_mean, cv_std, per_fold = cross_validate(
        reduced.values, reduced.labels, k=cls.folds, seed=cfg.seed,
        c=cls.c, gamma=cls.gamma,
    )
    model = svm_fit(reduced.values, reduced.labels, c=cls.c, gamma=cls.gamma)
    save_model(
        model,
        args.out,
        metadata={
            "columns": list(selection.chosen),
            "cv_mean": cv_mean,
            "cv_std": cv_std,
            "per_fold": per_fold,
            "config_hash": config_hash(cfg),
        },
    )
    if args.eval_out:
        eval_m = FeatureMatrix(m.values[eval_idx], tuple(labels[eval_idx]), m.columns)
        write_feature_csv(eval_m, args.eval_out)
    if args.report:
        _dump_json(
            {
                "cv_mean": cv_mean,
                "cv_std": cv_std,
                "per_fold": per_fold,
                "selected_columns": list(selection.chosen),
                "rankings": {
                    ch: [[r.feature, r.cv_accuracy, r.degenerate] for r in rk]
                    for ch, rk in rankings.items()
                },
                "train_rows": int(len(train_idx)),
                "eval_rows": int(len(eval_idx)),
            },
            args.report,
        )
    print(
        f"wrote {args.out}: CV accuracy {cv_mean:.3f} +- {cv_std:.3f} "
        f"({len(train_idx)} train rows, {len(eval_idx)} held out)"
    )
    return 0


# -- evaluate -----------------------------------------------------------------


def cmd_evaluate(args) -> int:
    model, meta = load_model(args.model)
    m = read_feature_csv(args.features)
    columns = meta.get("columns")
    if columns:
        m = m.select(columns)
    pred = predict_labels(model, m.values)
    truth = np.asarray(m.labels)
    acc = float(np.mean(pred == truth))
    per_class = {
        str(c): float(np.mean(pred[truth == c] == c)) for c in np.unique(truth)
    }
    report = {
        "accuracy": acc,
        "per_class_accuracy": per_class,
        "rows": int(m.n_rows),
        "cv_mean": meta.get("cv_mean"),
        "cv_std": meta.get("cv_std"),
    }
    if args.report:
        _dump_json(report, args.report)
    if args.figure:
        from .plots import render_cv_figure

        per_fold = meta.get("per_fold") or []
        render_cv_figure(
            args.figure, per_fold, meta.get("cv_mean") or acc,
            meta.get("cv_std") or 0.0, eval_accuracy=acc,
        )
    print(f"evaluation accuracy {acc:.3f} on {m.n_rows} rows; per-class {per_class}")
    return 0


# -- listen --------------------------------------------------------------------


def cmd_listen(args) -> int:
    from .live import AngleListener, LiveSession

    cfg = load_config(args.config)
    if not cfg.actions:
        raise ConfigError("config has no actions; nothing to detect")
    rec = parse_recording(args.emg)
    session = LiveSession(cfg, emg_t0=float(rec.t[0]))
    listener = AngleListener(args.port or cfg.io.port).start()
    chunk = max(1, args.chunk)
    delay = 0.0 if args.speed <= 0 else chunk / (256.0 * args.speed)
    deadline = time.monotonic() + args.timeout
    print(
        f"listening on udp:{args.port or cfg.io.port}, replaying {len(rec)} EMG rows",
        file=sys.stderr,
    )
    try:
        i = 0
        while i < len(rec) and time.monotonic() < deadline:
            while True:
                try:
                    session.push_frame(listener.frames.get_nowait())
                except queue.Empty:
                    break
            session.push_emg(rec.emg[i : i + chunk])
            i += chunk
            for seg in session.poll_segments():
                print(
                    json.dumps(
                        {
                            "provisional": seg.action_name,
                            "start_index": seg.start_index,
                            "end_index": seg.end_index,
                            "dtw_distance": seg.dtw_distance,
                        }
                    ),
                    file=sys.stderr,
                )
            if delay:
                time.sleep(delay)
        # drain frames still in flight, surfacing segments as they confirm
        t_end = time.monotonic() + max(0.2, args.drain)
        while time.monotonic() < t_end:
            got = False
            try:
                session.push_frame(listener.frames.get(timeout=0.05))
                got = True
            except queue.Empty:
                pass
            if got:
                for seg in session.poll_segments():
                    print(
                        json.dumps(
                            {
                                "provisional": seg.action_name,
                                "start_index": seg.start_index,
                                "end_index": seg.end_index,
                                "dtw_distance": seg.dtw_distance,
                            }
                        ),
                        file=sys.stderr,
                    )
    finally:
        listener.stop()
    _, dataset, report = session.close()
    write_dataset(dataset, args.out)
    if args.report:
        _dump_json(report, args.report)
    print(f"wrote {args.out} ({len(dataset)} segments)")
    return 0


# -- plotdata --------------------------------------------------------------------


def cmd_plotdata(args) -> int:
    from .plots import emit_plot_data

    cfg = load_config(args.config)
    rec = parse_recording(args.infile)
    manifest = emit_plot_data(cfg, rec, args.out_dir, render=not args.no_render)
    print(f"wrote {len(manifest['files'])} file(s) to {args.out_dir}")
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="emglabel",
        description="Automatic repetition labeling for joint-angle + sEMG recordings.",
    )
    p.add_argument("--version", action="version", version=f"emglabel {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic recording with ground truth")
    s.add_argument("--reps", type=int, default=8)
    s.add_argument("--actions", type=int, choices=(1, 2), default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, default=1.0, help="angle noise sigma [deg]")
    s.add_argument("--out", required=True)
    s.add_argument("--truth", default=None)
    s.add_argument("--templates-dir", default=None)
    s.add_argument("--emit-config", default=None)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("denoise", help="filter EMG and SSA-smooth angle channels")
    s.add_argument("--config", required=True)
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_denoise)

    s = sub.add_parser("segment", help="scan templates and extract candidate segments")
    s.add_argument("--config", required=True)
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("label", help="attach channel slices to extracted segments")
    s.add_argument("--config", required=True)
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--segments", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("featurize", help="compute the per-segment feature matrix")
    s.add_argument("--in", dest="infiles", action="append", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--config", default=None, help="supplies WA/SSC threshold overrides")
    s.add_argument("--no-log", action="store_true", help="skip log normalization")
    s.set_defaults(func=cmd_featurize)

    s = sub.add_parser("train", help="select features, cross-validate, fit the SVM")
    s.add_argument("--config", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--eval-out", default=None, help="write held-out rows here")
    s.add_argument("--report", default=None)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", help="score a model on a feature file")
    s.add_argument("--model", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--report", default=None)
    s.add_argument("--figure", default=None, help="render the CV/eval accuracy figure")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("listen", help="live mode: UDP angle frames + EMG replay")
    s.add_argument("--config", required=True)
    s.add_argument("--emg", required=True, help="recording CSV supplying the EMG rows")
    s.add_argument("--port", type=int, default=None)
    s.add_argument("--speed", type=float, default=0.0, help="replay speed, 0 = flat out")
    s.add_argument("--chunk", type=int, default=32, help="EMG rows per push")
    s.add_argument("--timeout", type=float, default=300.0)
    s.add_argument("--drain", type=float, default=0.2)
    s.add_argument("--out", required=True)
    s.add_argument("--report", default=None)
    s.set_defaults(func=cmd_listen)

    s = sub.add_parser("plotdata", help="emit figure-backing CSVs and rendered PNGs")
    s.add_argument("--config", required=True)
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--no-render", action="store_true")
    s.set_defaults(func=cmd_plotdata)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail("ConfigError", str(exc), 2)
    except EmgLabelError as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    except OSError as exc:
        return _fail("OSError", str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
