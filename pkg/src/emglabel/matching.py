"""Template matching: DTW, the sliding-window scan, minima, extraction.

The scan slides a window of twice the template length across the stream one
sample at a time and records the full DTW alignment cost of each window,
producing a distance profile. Repetitions of the template show up as local
minima of that profile; a recursive prominence detector finds them, and
adjacent minima bound the candidate segments.

The DTW recurrences run as numba kernels; the scan and the standalone
distance use the same per-cell arithmetic, so a profile entry recomputed via
dtw_distance matches the scan output bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    InsufficientBoundariesError,
    InsufficientDataError,
    InvalidInputError,
    InvalidParameterError,
)
from .signals import TimeSeries

WINDOW_FACTOR = 2  # window width = WINDOW_FACTOR * template length
PEAK_THRESHOLD = 0.5
MAX_RECURSION_DEPTH = 3
_MIN_SECTION_LEN = 3  # shorter sections are not recursed into


@dataclass(frozen=True)
class Template:
    """A single-repetition motion trace to search for in a stream."""

    action_name: str
    series: TimeSeries
    expected_count: int
    max_distance: float | None = None

    def __post_init__(self) -> None:
        if len(self.series) < 2:
            raise InvalidParameterError("template series must have at least 2 samples")
        if self.expected_count < 1:
            raise InvalidParameterError(
                f"expected_count must be >= 1, got {self.expected_count}"
            )


@dataclass(frozen=True)
class DistanceProfile:
    """Per-window DTW costs plus the stream start index of each window."""

    distances: np.ndarray
    positions: np.ndarray
    window_len: int
    template_len: int

    def __len__(self) -> int:
        return len(self.distances)


@dataclass(frozen=True)
class Segment:
    """One candidate repetition: a stream interval and its match cost."""

    action_name: str
    start_index: int
    end_index: int
    dtw_distance: float


@dataclass(frozen=True)
class ExtractionResult:
    segments: tuple[Segment, ...]  # ascending by dtw_distance
    shortfall: int  # how many short of expected_count
    discarded: int  # candidates dropped by the max_distance cutoff
    diagnostics: str = ""


@njit(cache=True)
def _dtw_matrix(a, b, squared):
    n = a.shape[0]
    m = b.shape[0]
    c = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            diff = a[i] - b[j]
            d = diff * diff if squared else abs(diff)
            if i == 0 and j == 0:
                c[i, j] = d
            elif i == 0:
                c[i, j] = c[i, j - 1] + d
            elif j == 0:
                c[i, j] = c[i - 1, j] + d
            else:
                best = c[i - 1, j - 1]
                if c[i - 1, j] < best:
                    best = c[i - 1, j]
                if c[i, j - 1] < best:
                    best = c[i, j - 1]
                c[i, j] = best + d
    return c


@njit(cache=True)
def _dtw_cost(a, b, squared):
    # Two-row variant of _dtw_matrix: identical per-cell arithmetic.
    n = a.shape[0]
    m = b.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    for i in range(n):
        for j in range(m):
            diff = a[i] - b[j]
            d = diff * diff if squared else abs(diff)
            if i == 0 and j == 0:
                cur[j] = d
            elif i == 0:
                cur[j] = cur[j - 1] + d
            elif j == 0:
                cur[j] = prev[j] + d
            else:
                best = prev[j - 1]
                if prev[j] < best:
                    best = prev[j]
                if cur[j - 1] < best:
                    best = cur[j - 1]
                cur[j] = best + d
        prev, cur = cur, prev
    return prev[m - 1]


@njit(cache=True)
def _scan_kernel(template, stream, window_len, squared):
    count = stream.shape[0] - window_len + 1
    out = np.empty(count)
    for p in range(count):
        out[p] = _dtw_cost(template, stream[p : p + window_len], squared)
    return out


def _as_array(x, name: str) -> np.ndarray:
    if isinstance(x, TimeSeries):
        arr = x.samples
    else:
        arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise InvalidInputError(f"{name} must be a non-empty 1-D sequence")
    return np.ascontiguousarray(arr, dtype=np.float64)


def dtw_distance(a, b, squared_cost: bool = False) -> tuple[float, list[tuple[int, int]]]:
    """Classic DTW with moves {diagonal, up, left}, no global constraint.

    Local cost is |a_i - b_j| (or squared when squared_cost). Returns the
    accumulated cost of the optimal warping path and the path itself as
    (i, j) index pairs from (0, 0) to (n-1, m-1).
    """
    av = _as_array(a, "a")
    bv = _as_array(b, "b")
    c = _dtw_matrix(av, bv, squared_cost)
    i, j = len(av) - 1, len(bv) - 1
    path = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            best = c[i - 1, j - 1]
            move = 0
            if c[i - 1, j] < best:
                best = c[i - 1, j]
                move = 1
            if c[i, j - 1] < best:
                move = 2
            if move == 0:
                i, j = i - 1, j - 1
            elif move == 1:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return float(c[-1, -1]), path


def mdtw_scan(
    template: Template,
    stream: TimeSeries,
    squared_cost: bool = False,
    window_factor: int = WINDOW_FACTOR,
) -> DistanceProfile:
    """Stride-1 sliding-window DTW of the template against the stream."""
    if window_factor < 1:
        raise InvalidParameterError(f"window_factor must be >= 1, got {window_factor}")
    t = _as_array(template.series, "template")
    s = _as_array(stream, "stream")
    window_len = window_factor * len(t)
    if len(s) < window_len:
        raise InsufficientDataError(
            f"stream has {len(s)} samples but the scan window needs {window_len}"
        )
    distances = _scan_kernel(t, s, window_len, squared_cost)
    return DistanceProfile(
        distances=distances,
        positions=np.arange(len(distances), dtype=np.int64),
        window_len=window_len,
        template_len=len(t),
    )


def _interior_minima(x: np.ndarray, lo: int, hi: int) -> list[int]:
    """Plateau-aware local minima of x[lo:hi], strictly interior ones only."""
    out = []
    i = lo
    while i < hi:
        j = i
        while j + 1 < hi and x[j + 1] == x[i]:
            j += 1
        if i > lo and j < hi - 1 and x[i - 1] > x[i] and x[j + 1] > x[j]:
            out.append((i + j) // 2)
        i = j + 1
    return out


def _prominence(x: np.ndarray, lo: int, hi: int, idx: int) -> float:
    """Valley prominence of x[idx] with walls at the section edges.

    On each side, walk until a strictly lower value or the section edge; the
    barrier is the highest value passed. Prominence is the lower barrier
    minus the valley value.
    """
    v = x[idx]
    left = -np.inf
    k = idx - 1
    while k >= lo and x[k] >= v:
        if x[k] > left:
            left = x[k]
        k -= 1
    right = -np.inf
    k = idx + 1
    while k < hi and x[k] >= v:
        if x[k] > right:
            right = x[k]
        k += 1
    return min(left, right) - v


def _search_section(
    x: np.ndarray, lo: int, hi: int, threshold: float, depth: int
) -> list[int]:
    if hi - lo < _MIN_SECTION_LEN:
        return []
    accepted = [
        i for i in _interior_minima(x, lo, hi) if _prominence(x, lo, hi, i) >= threshold
    ]
    found = list(accepted)
    if depth > 1:
        walls = [lo] + accepted + [hi - 1]
        for a, b in zip(walls[:-1], walls[1:]):
            found.extend(_search_section(x, a, b + 1, threshold / 2.0, depth - 1))
    return found


def detect_local_minima(
    profile: DistanceProfile,
    threshold: float = PEAK_THRESHOLD,
    max_depth: int = MAX_RECURSION_DEPTH,
) -> list[int]:
    """Recursive prominence-based minima detection on the distance profile.

    The profile is min-max normalized once, globally. Level 1 keeps minima
    with prominence >= threshold; the sections between consecutive accepted
    minima (and the profile ends) are then re-searched with the threshold
    halved, down to max_depth levels. A constant profile yields no minima.
    """
    if not (0.0 < threshold <= 1.0):
        raise InvalidParameterError(f"threshold must be in (0, 1], got {threshold}")
    if max_depth < 1:
        raise InvalidParameterError(f"max_depth must be >= 1, got {max_depth}")
    d = profile.distances
    if len(d) == 0:
        raise InvalidInputError("profile is empty")
    span = float(d.max() - d.min())
    if span == 0.0:
        return []
    norm = (d - d.min()) / span
    return sorted(set(_search_section(norm, 0, len(norm), threshold, max_depth)))


def extract_segments(
    profile: DistanceProfile,
    minima: list[int],
    template: Template,
    stream: TimeSeries,
    squared_cost: bool = False,
) -> ExtractionResult:
    """Form candidate segments between adjacent minima and keep the best.

    Candidate segments are the stream intervals between the window-start
    positions of adjacent minima. Each is scored with one-to-one DTW
    against the template, those above max_distance are discarded,
    survivors are sorted ascending by distance (ties broken by earlier
    start), and the first expected_count are returned.
    """
    if len(minima) < 2:
        raise InsufficientBoundariesError(
            f"need at least 2 minima to bound a segment, got {len(minima)}"
        )
    stream_arr = _as_array(stream, "stream")
    n_stream = len(stream_arr)

    bounds = [int(profile.positions[m]) for m in sorted(minima)]
    candidates = []
    for start, end in zip(bounds[:-1], bounds[1:]):
        start = max(0, min(start, n_stream - 1))
        end = max(0, min(end, n_stream))
        if end - start < 2:
            continue
        cost, _ = dtw_distance(template.series, stream_arr[start:end], squared_cost)
        candidates.append(Segment(template.action_name, start, end, cost))

    discarded = 0
    if template.max_distance is not None:
        kept = [c for c in candidates if c.dtw_distance <= template.max_distance]
        discarded = len(candidates) - len(kept)
        candidates = kept

    candidates.sort(key=lambda seg: (seg.dtw_distance, seg.start_index))
    chosen = tuple(candidates[: template.expected_count])
    shortfall = template.expected_count - len(chosen)
    diag = ""
    if not chosen:
        diag = (
            f"no surviving candidates for '{template.action_name}' "
            f"({discarded} discarded by max_distance)"
        )
    elif shortfall > 0:
        diag = (
            f"only {len(chosen)} of {template.expected_count} expected segments "
            f"for '{template.action_name}'"
        )
    return ExtractionResult(chosen, shortfall, discarded, diag)
