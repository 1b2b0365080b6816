import numpy as np
import pytest

from emglabel.signals import TimeSeries


@pytest.fixture
def fs():
    return 256.0


def tone_amplitude(x: np.ndarray, fs: float, f: float) -> float:
    """FFT oracle: steady-state amplitude of the f-Hz component, measured on
    the last half of the signal so filter transients are excluded."""
    tail = np.asarray(x)[len(x) // 2 :]
    n = len(tail)
    spec = np.fft.rfft(tail)
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    k = int(np.argmin(np.abs(freqs - f)))
    return 2.0 * np.abs(spec[k]) / n


def db(ratio: float) -> float:
    return 20.0 * np.log10(ratio)


@pytest.fixture
def tone_amp():
    return tone_amplitude


def make_series(samples, fs=256.0, t0=0.0) -> TimeSeries:
    return TimeSeries(np.asarray(samples, dtype=float), fs, t0)
