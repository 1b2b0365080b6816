"""Per-segment EMG features, log normalization, and LDA-based selection.

Ten features per channel per segment. Spectral quantities all come from a
single Hann-windowed periodogram of the segment. Threshold features (WA,
SSC) use a scale-relative epsilon of 0.1 x the segment's standard
deviation, so normalization order does not matter.

Feature selection fits a one-dimensional two-class LDA on each single
feature and scores it by stratified k-fold cross-validation accuracy; the
two best features per channel form the reduced 10-column matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import signal as _sig

from .errors import InvalidInputError, InvalidParameterError, NormalizationError
from .signals import TimeSeries

FEATURE_NAMES = ("mdf", "rms", "zcr", "wa", "psd", "ssc", "sc", "pdf", "se", "svd")
N_CHANNELS = 5
N_FEATURES = len(FEATURE_NAMES)
MIN_SEGMENT_LEN = 16
HISTOGRAM_BINS = 32
SVD_EMBED_ORDER = 10
THRESHOLD_SCALE = 0.1  # epsilon for WA/SSC = this times the segment std


def _periodogram(x: np.ndarray, fs: float):
    freqs, power = _sig.periodogram(x, fs=fs, window="hann")
    return freqs, power


def compute_feature(
    segment_channel: TimeSeries,
    feature_id: int | str,
    wa_threshold: float | None = None,
    ssc_threshold: float | None = None,
) -> float:
    """One scalar feature of one channel slice.

    feature_id is 1..10 or a name from FEATURE_NAMES. Absolute threshold
    overrides for WA/SSC are taken as given; otherwise both default to
    0.1 x std of the segment.
    """
    if isinstance(feature_id, str):
        name = feature_id.lower()
        if name not in FEATURE_NAMES:
            raise InvalidParameterError(f"unknown feature {feature_id!r}")
    else:
        if not (1 <= feature_id <= N_FEATURES):
            raise InvalidParameterError(f"feature_id must be 1..{N_FEATURES}")
        name = FEATURE_NAMES[feature_id - 1]

    x = segment_channel.samples
    n = len(x)
    if n < MIN_SEGMENT_LEN:
        raise InvalidInputError(f"segment too short: {n} < {MIN_SEGMENT_LEN} samples")
    fs = segment_channel.sample_rate_hz
    eps = THRESHOLD_SCALE * float(np.std(x))

    if name == "rms":
        return float(np.sqrt(np.mean(x * x)))
    if name == "zcr":
        return float(np.sum(x[:-1] * x[1:] < 0) / (n - 1))
    if name == "wa":
        thr = eps if wa_threshold is None else wa_threshold
        return float(np.sum(np.abs(np.diff(x)) > thr))
    if name == "ssc":
        # local-extremum count; the product comparison uses eps squared so
        # the feature stays invariant under positive scaling
        thr = eps if ssc_threshold is None else ssc_threshold
        prod = (x[1:-1] - x[:-2]) * (x[1:-1] - x[2:])
        return float(np.sum(prod > thr * thr))
    if name == "pdf":
        if np.ptp(x) == 0.0:
            return 1.0
        hist, _ = np.histogram(x, bins=HISTOGRAM_BINS, range=(x.min(), x.max()))
        return float(hist.max() / n)
    if name == "svd":
        emb = np.lib.stride_tricks.sliding_window_view(x, SVD_EMBED_ORDER)
        s = np.linalg.svd(emb, compute_uv=False)
        total = s.sum()
        if total == 0.0:
            return 0.0
        p = s / total
        p = p[p > 0]
        return float(-(p * np.log(p)).sum() / np.log(SVD_EMBED_ORDER))

    freqs, power = _periodogram(x, fs)
    total = power.sum()
    if name == "psd":
        return float(power.mean())
    if name == "mdf":
        if total == 0.0:
            return 0.0
        return float(freqs[np.searchsorted(np.cumsum(power), total / 2.0)])
    if name == "sc":
        if total == 0.0:
            return 0.0
        return float((freqs * power).sum() / total)
    if name == "se":
        if total == 0.0:
            return 0.0
        p = power / total
        p = p[p > 0]
        return float(-(p * np.log(p)).sum() / np.log(len(power)))
    raise InvalidParameterError(f"unknown feature {name!r}")  # unreachable


def column_name(channel: int, feature: str) -> str:
    return f"ch{channel}_{feature}"


@dataclass(frozen=True)
class FeatureMatrix:
    """Segments x (5 channels x 10 features), with per-row action labels."""

    values: np.ndarray  # (n_rows, 50)
    labels: tuple[str, ...]
    columns: tuple[str, ...]  # ch<i>_<feature> in channel-major order

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != len(self.labels) or v.shape[1] != len(self.columns):
            raise InvalidInputError(
                f"shape mismatch: values {v.shape}, {len(self.labels)} labels, "
                f"{len(self.columns)} columns"
            )
        if np.any(np.isnan(v)):
            raise InvalidInputError("feature matrix contains NaN")
        object.__setattr__(self, "values", v)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def select(self, columns: list[str]) -> "FeatureMatrix":
        idx = [self.columns.index(c) for c in columns]
        return FeatureMatrix(self.values[:, idx], self.labels, tuple(columns))


def default_columns() -> tuple[str, ...]:
    return tuple(
        column_name(ch, f) for ch in range(1, N_CHANNELS + 1) for f in FEATURE_NAMES
    )


def extract_features(
    segments_emg: list[np.ndarray],
    labels: list[str],
    sample_rate_hz: float,
    wa_threshold: float | None = None,
    ssc_threshold: float | None = None,
) -> FeatureMatrix:
    """Build the 50-column matrix from per-segment (len, 5) EMG slices."""
    if len(segments_emg) != len(labels):
        raise InvalidInputError("one label per segment required")
    rows = []
    for emg in segments_emg:
        emg = np.asarray(emg, dtype=np.float64)
        if emg.ndim != 2 or emg.shape[1] != N_CHANNELS:
            raise InvalidInputError(f"segment EMG must be (len, 5), got {emg.shape}")
        row = []
        for ch in range(N_CHANNELS):
            series = TimeSeries(emg[:, ch], sample_rate_hz)
            row.extend(
                compute_feature(series, f, wa_threshold=wa_threshold,
                                ssc_threshold=ssc_threshold)
                for f in FEATURE_NAMES
            )
        rows.append(row)
    return FeatureMatrix(np.array(rows, dtype=np.float64).reshape(len(rows), -1),
                         tuple(labels), default_columns())


def log_normalize(m: FeatureMatrix) -> FeatureMatrix:
    """Apply ln(1 + v) cellwise; strictly monotone, so ranks are preserved."""
    neg = np.argwhere(m.values < 0.0)
    if len(neg):
        r, c = neg[0]
        col = m.columns[c]
        raise NormalizationError(
            f"negative feature value at row {r}, column {col} "
            f"({m.values[r, c]!r}): outside the log-normalization domain"
        )
    return FeatureMatrix(np.log1p(m.values), m.labels, m.columns)


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Row indices of k stratified folds; shuffling fixed by seed."""
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        for i, row in enumerate(idx):
            folds[i % k].append(int(row))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


class _Lda1D:
    """Two-class LDA on a single feature: pooled-variance Gaussian classes."""

    def fit(self, x: np.ndarray, y: np.ndarray, classes) -> bool:
        self.classes = classes
        self.mu = np.array([x[y == c].mean() for c in classes])
        n = len(x)
        ss = sum(float(((x[y == c] - m) ** 2).sum()) for c, m in zip(classes, self.mu))
        self.var = ss / max(n - 2, 1)
        self.logprior = np.array([np.log(np.mean(y == c)) for c in classes])
        scale = float(np.var(x)) + 1e-300
        return bool(self.var / scale > 1e-12)  # False: degenerate (constant) feature

    def predict(self, x: np.ndarray) -> np.ndarray:
        scores = (
            x[:, None] * self.mu / self.var
            - self.mu**2 / (2 * self.var)
            + self.logprior
        )
        return self.classes[np.argmax(scores, axis=1)]


@dataclass(frozen=True)
class FeatureRank:
    feature: str
    cv_accuracy: float
    degenerate: bool = False


def lda_rank(
    m: FeatureMatrix, channel: int, k: int = 5, seed: int = 0
) -> list[FeatureRank]:
    """Score each of a channel's features with per-feature LDA accuracy.

    Constant (zero within-class variance) features score 0.5 and are
    flagged. Sorted by accuracy descending, ties broken by feature order.
    """
    labels = np.asarray(m.labels)
    classes = np.unique(labels)
    if len(classes) < 2:
        raise InvalidParameterError("need at least 2 classes to rank features")
    counts = [int(np.sum(labels == c)) for c in classes]
    if min(counts) < 4:
        raise InvalidParameterError("need at least 4 rows per class")
    k_eff = min(k, min(counts))
    folds = stratified_folds(labels, k_eff, seed)
    ranks = []
    for f in FEATURE_NAMES:
        x = m.column(column_name(channel, f))
        model = _Lda1D()
        if not model.fit(x, labels, classes):
            ranks.append(FeatureRank(f, 0.5, degenerate=True))
            continue
        correct = total = 0
        for i in range(k_eff):
            test = folds[i]
            train = np.setdiff1d(np.arange(len(labels)), test)
            fold_model = _Lda1D()
            if not fold_model.fit(x[train], labels[train], classes):
                continue
            pred = fold_model.predict(x[test])
            correct += int(np.sum(pred == labels[test]))
            total += len(test)
        acc = correct / total if total else 0.5
        ranks.append(FeatureRank(f, acc))
    order = {f: i for i, f in enumerate(FEATURE_NAMES)}
    ranks.sort(key=lambda r: (-r.cv_accuracy, order[r.feature]))
    return ranks


@dataclass(frozen=True)
class FeatureSelection:
    """Per-channel rankings and the chosen top-2 columns per channel."""

    rankings: dict[int, tuple[FeatureRank, ...]]
    chosen: tuple[str, ...]  # 10 column names in channel order


def select_top2(rankings: dict[int, list[FeatureRank]]) -> FeatureSelection:
    """Keep the two best-scoring features of every channel, channel order."""
    if sorted(rankings) != list(range(1, N_CHANNELS + 1)):
        raise InvalidParameterError(f"need rankings for channels 1..{N_CHANNELS}")
    chosen = []
    for ch in range(1, N_CHANNELS + 1):
        ranked = rankings[ch]
        if len(ranked) < 2:
            raise InvalidParameterError(f"channel {ch}: fewer than 2 ranked features")
        chosen += [column_name(ch, ranked[0].feature), column_name(ch, ranked[1].feature)]
    return FeatureSelection(
        rankings={ch: tuple(r) for ch, r in rankings.items()},
        chosen=tuple(chosen),
    )


def write_feature_csv(m: FeatureMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(m.columns) + ["label"])
        for i in range(m.n_rows):
            w.writerow([repr(float(v)) for v in m.values[i]] + [m.labels[i]])


def read_feature_csv(path) -> FeatureMatrix:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[-1] != "label":
            raise InvalidInputError(f"{path}: expected trailing 'label' column")
        cols = tuple(header[:-1])
        values, labels = [], []
        for row in reader:
            if not row:
                continue
            values.append([float(v) for v in row[:-1]])
            labels.append(row[-1])
    return FeatureMatrix(np.array(values, dtype=np.float64).reshape(len(labels), -1),
                         tuple(labels), cols)
