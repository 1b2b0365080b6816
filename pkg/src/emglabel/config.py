"""Pipeline configuration: one JSON file, validated before any data is read.

Defaults mirror the fixed pipeline constants (window factor 2, peak
threshold 0.5, recursion depth 3, five folds). All randomness downstream
flows from the single ``seed`` field. An annotated example lives in the
repository README.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError
from .ingest import SAMPLE_RATE_HZ
from .matching import Template
from .signals import TimeSeries

TEMPLATE_FORMAT = "emglabel-template-v1"


@dataclass(frozen=True)
class FilterConfig:
    band_low_hz: float = 1.0
    band_high_hz: float = 120.0
    band_order: int = 2
    notch_hz: float = 60.0
    notch_q: float = 30.0


@dataclass(frozen=True)
class SsaConfig:
    # Mild smoothing: enough to knock down sensor noise without rounding
    # off motion onsets, which the scan keys on.
    window_len: int | None = 8
    rank: int = 4


@dataclass(frozen=True)
class MdtwConfig:
    window_factor: int = 2
    threshold: float = 0.5
    max_depth: int = 3
    max_distance: float | None = None
    squared_cost: bool = False


@dataclass(frozen=True)
class ActionConfig:
    name: str
    template_path: str
    expected_count: int
    max_distance: float | None = None


@dataclass(frozen=True)
class FeatureConfig:
    wa_threshold: float | None = None  # None: 0.1 x segment std
    ssc_threshold: float | None = None


@dataclass(frozen=True)
class ClassifierConfig:
    c: float = 1.0
    gamma: float | None = None  # None: median pairwise-distance heuristic
    folds: int = 5
    train_fraction: float = 0.8


@dataclass(frozen=True)
class IoConfig:
    port: int = 7355
    clock_offset_s: float = 0.0  # added to angle-frame timestamps on merge
    interpolate_angles: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    actions: tuple[ActionConfig, ...] = ()
    seed: int = 0
    filters: FilterConfig = field(default_factory=FilterConfig)
    ssa: SsaConfig = field(default_factory=SsaConfig)
    mdtw: MdtwConfig = field(default_factory=MdtwConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    io: IoConfig = field(default_factory=IoConfig)


def validate_config(cfg: PipelineConfig) -> PipelineConfig:
    """Check every numeric field against its consumer's preconditions."""
    f = cfg.filters
    nyq = SAMPLE_RATE_HZ / 2
    if not (0 < f.band_low_hz < f.band_high_hz < nyq):
        raise ConfigError(
            f"filters: band ({f.band_low_hz}, {f.band_high_hz}) must lie inside (0, {nyq})"
        )
    if f.band_order < 1:
        raise ConfigError(f"filters: band_order must be >= 1, got {f.band_order}")
    if not (0 < f.notch_hz < nyq):
        raise ConfigError(f"filters: notch_hz {f.notch_hz} outside (0, {nyq})")
    if f.notch_q <= 0:
        raise ConfigError(f"filters: notch_q must be > 0, got {f.notch_q}")
    s = cfg.ssa
    if s.window_len is not None and s.window_len < 2:
        raise ConfigError(f"ssa: window_len must be >= 2 or null, got {s.window_len}")
    if s.rank < 1:
        raise ConfigError(f"ssa: rank must be >= 1, got {s.rank}")
    m = cfg.mdtw
    if m.window_factor < 1:
        raise ConfigError(f"mdtw: window_factor must be >= 1, got {m.window_factor}")
    if not (0 < m.threshold <= 1):
        raise ConfigError(f"mdtw: threshold must be in (0, 1], got {m.threshold}")
    if m.max_depth < 1:
        raise ConfigError(f"mdtw: max_depth must be >= 1, got {m.max_depth}")
    if m.max_distance is not None and m.max_distance < 0:
        raise ConfigError(f"mdtw: max_distance must be >= 0, got {m.max_distance}")
    for a in cfg.actions:
        if not a.name:
            raise ConfigError("actions: empty action name")
        if a.expected_count < 1:
            raise ConfigError(
                f"action {a.name!r}: expected_count must be >= 1, got {a.expected_count}"
            )
        if a.max_distance is not None and a.max_distance < 0:
            raise ConfigError(f"action {a.name!r}: max_distance must be >= 0")
    c = cfg.classifier
    if c.c <= 0:
        raise ConfigError(f"classifier: c must be > 0, got {c.c}")
    if c.gamma is not None and c.gamma <= 0:
        raise ConfigError(f"classifier: gamma must be > 0, got {c.gamma}")
    if c.folds < 2:
        raise ConfigError(f"classifier: folds must be >= 2, got {c.folds}")
    if not (0 < c.train_fraction < 1):
        raise ConfigError(
            f"classifier: train_fraction must be in (0, 1), got {c.train_fraction}"
        )
    if not (0 < cfg.io.port < 65536):
        raise ConfigError(f"io: port {cfg.io.port} out of range")
    return cfg


def _from_dict(doc: dict) -> PipelineConfig:
    def sub(cls, key):
        raw = doc.get(key, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"{key}: expected an object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{key}: unknown field(s) {sorted(unknown)}")
        return cls(**raw)

    actions_raw = doc.get("actions", [])
    actions = []
    for i, a in enumerate(actions_raw):
        known = set(ActionConfig.__dataclass_fields__)
        unknown = set(a) - known
        if unknown:
            raise ConfigError(f"actions[{i}]: unknown field(s) {sorted(unknown)}")
        missing = {"name", "template_path", "expected_count"} - set(a)
        if missing:
            raise ConfigError(f"actions[{i}]: missing field(s) {sorted(missing)}")
        actions.append(ActionConfig(**a))
    top_known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(doc) - top_known
    if unknown:
        raise ConfigError(f"unknown top-level field(s) {sorted(unknown)}")
    return PipelineConfig(
        actions=tuple(actions),
        seed=int(doc.get("seed", 0)),
        filters=sub(FilterConfig, "filters"),
        ssa=sub(SsaConfig, "ssa"),
        mdtw=sub(MdtwConfig, "mdtw"),
        features=sub(FeatureConfig, "features"),
        classifier=sub(ClassifierConfig, "classifier"),
        io=sub(IoConfig, "io"),
    )


def load_config(path) -> PipelineConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    try:
        cfg = _from_dict(doc)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return validate_config(cfg)


def save_config(cfg: PipelineConfig, path) -> None:
    doc = asdict(cfg)
    doc["actions"] = [asdict(a) for a in cfg.actions]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(cfg: PipelineConfig) -> str:
    """Stable 16-hex-digit digest of the full configuration."""
    doc = asdict(cfg)
    doc["actions"] = [asdict(a) for a in cfg.actions]
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def write_template(series: TimeSeries, action_name: str, path) -> None:
    doc = {
        "format": TEMPLATE_FORMAT,
        "action": action_name,
        "sample_rate_hz": series.sample_rate_hz,
        "samples": series.samples.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_template(action: ActionConfig, global_max_distance: float | None = None) -> Template:
    try:
        with open(action.template_path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"template {action.template_path}: {exc}") from None
    if doc.get("format") != TEMPLATE_FORMAT:
        raise ConfigError(f"template {action.template_path}: not a {TEMPLATE_FORMAT} file")
    series = TimeSeries(
        np.array(doc["samples"], dtype=np.float64), float(doc["sample_rate_hz"])
    )
    max_distance = action.max_distance
    if max_distance is None:
        max_distance = global_max_distance
    return Template(
        action_name=action.name,
        series=series,
        expected_count=action.expected_count,
        max_distance=max_distance,
    )
