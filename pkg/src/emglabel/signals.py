"""Uniformly sampled scalar signals and the IIR filters applied to them.

TimeSeries is the currency every processing stage trades in: a 1-D float
array plus its sample rate and start time. Filters are causal (forward-only)
biquad cascades, matching a near-real-time acquisition chain; zero-phase
filtering would need future samples.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal as _sig

from .errors import InvalidInputError, InvalidParameterError


@dataclass(frozen=True)
class TimeSeries:
    """One channel of uniformly sampled data.

    samples: 1-D float array, non-empty for any consuming operation.
    sample_rate_hz: sampling rate, > 0.
    t0: timestamp of the first sample in seconds.
    """

    samples: np.ndarray
    sample_rate_hz: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidInputError(f"samples must be 1-D, got shape {arr.shape}")
        if self.sample_rate_hz <= 0:
            raise InvalidParameterError(
                f"sample_rate_hz must be > 0, got {self.sample_rate_hz}"
            )
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def times(self) -> np.ndarray:
        """Per-sample timestamps t0 + i / rate."""
        return self.t0 + np.arange(len(self)) / self.sample_rate_hz

    def with_samples(self, samples: np.ndarray) -> "TimeSeries":
        """Copy of this series carrying new samples, same rate and t0."""
        return replace(self, samples=np.asarray(samples, dtype=np.float64))


def _check_finite(s: TimeSeries) -> None:
    if len(s) == 0:
        raise InvalidInputError("series is empty")
    if not np.all(np.isfinite(s.samples)):
        raise InvalidInputError("series contains non-finite values")


def bandpass_filter(
    s: TimeSeries, low_hz: float = 1.0, high_hz: float = 120.0, order: int = 2
) -> TimeSeries:
    """Butterworth band-pass, causal, as a cascade of biquad sections.

    Band edges must satisfy 0 < low < high < Nyquist. Output has the same
    length, rate and t0 as the input.
    """
    _check_finite(s)
    nyq = s.sample_rate_hz / 2.0
    if not (0.0 < low_hz < high_hz < nyq):
        raise InvalidParameterError(
            f"band edges ({low_hz}, {high_hz}) must lie inside (0, {nyq}) Hz"
        )
    if order < 1:
        raise InvalidParameterError(f"order must be >= 1, got {order}")
    sos = _sig.butter(order, [low_hz / nyq, high_hz / nyq], btype="bandpass", output="sos")
    return s.with_samples(_sig.sosfilt(sos, s.samples))


def notch_filter(s: TimeSeries, f0_hz: float = 60.0, q: float = 30.0) -> TimeSeries:
    """Single-biquad notch at f0_hz, causal. q = f0 / bandwidth."""
    _check_finite(s)
    nyq = s.sample_rate_hz / 2.0
    if not (0.0 < f0_hz < nyq):
        raise InvalidParameterError(f"notch frequency {f0_hz} must lie inside (0, {nyq}) Hz")
    if q <= 0:
        raise InvalidParameterError(f"q must be > 0, got {q}")
    b, a = _sig.iirnotch(f0_hz / nyq, q)
    return s.with_samples(_sig.lfilter(b, a, s.samples))
