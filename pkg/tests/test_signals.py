import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emglabel.errors import InvalidInputError, InvalidParameterError
from emglabel.signals import TimeSeries, bandpass_filter, notch_filter

from conftest import db, make_series, tone_amplitude

FS = 256.0


def _tone(f, dur_s=4.0, fs=FS):
    t = np.arange(int(fs * dur_s)) / fs
    return make_series(np.sin(2 * np.pi * f * t), fs)


class TestBandpass:
    def test_dc_removed_from_constant(self):
        out = bandpass_filter(make_series(np.ones(1024))).samples
        assert np.all(np.abs(out[-256:]) < 0.05)

    def test_passband_10hz_within_3db(self):
        out = bandpass_filter(_tone(10.0)).samples
        amp = tone_amplitude(out, FS, 10.0)
        assert db(amp) > -3.0

    def test_stopband_200hz_attenuated_12db(self):
        fs = 512.0
        out = bandpass_filter(_tone(200.0, fs=fs), 1.0, 120.0, 2).samples
        amp = tone_amplitude(out, fs, 200.0)
        assert db(amp) <= -12.0

    def test_length_and_metadata_preserved(self):
        s = _tone(5.0, dur_s=1.0)
        out = bandpass_filter(s)
        assert len(out) == len(s)
        assert out.sample_rate_hz == s.sample_rate_hz
        assert out.t0 == s.t0

    def test_band_edges_validated(self):
        s = _tone(10.0, dur_s=0.5)
        with pytest.raises(InvalidParameterError):
            bandpass_filter(s, 0.0, 120.0)
        with pytest.raises(InvalidParameterError):
            bandpass_filter(s, 1.0, 128.0)  # at Nyquist
        with pytest.raises(InvalidParameterError):
            bandpass_filter(s, 50.0, 10.0)
        with pytest.raises(InvalidParameterError):
            bandpass_filter(s, 1.0, 120.0, order=0)

    def test_nonfinite_input_rejected(self):
        x = np.ones(64)
        x[10] = np.nan
        with pytest.raises(InvalidInputError):
            bandpass_filter(make_series(x))
        with pytest.raises(InvalidInputError):
            bandpass_filter(make_series(np.array([])))


class TestNotch:
    def test_60hz_killed(self):
        out = notch_filter(_tone(60.0)).samples
        assert tone_amplitude(out, FS, 60.0) <= 0.0316  # -30 dB

    def test_10hz_untouched(self):
        out = notch_filter(_tone(10.0)).samples
        assert db(tone_amplitude(out, FS, 10.0)) > -1.0

    def test_zero_series_stays_zero(self):
        out = notch_filter(make_series(np.zeros(512))).samples
        assert np.all(out == 0.0)

    def test_parameters_validated(self):
        s = _tone(10.0, dur_s=0.5)
        with pytest.raises(InvalidParameterError):
            notch_filter(s, f0_hz=128.0)
        with pytest.raises(InvalidParameterError):
            notch_filter(s, f0_hz=60.0, q=0.0)


@settings(max_examples=25, deadline=None)
@given(
    scale=st.floats(min_value=-50.0, max_value=50.0).filter(lambda a: abs(a) > 1e-3),
    seed=st.integers(min_value=0, max_value=2**16),
)
def test_filters_are_linear(scale, seed):
    x = np.random.default_rng(seed).standard_normal(300)
    for filt in (bandpass_filter, notch_filter):
        once = filt(make_series(scale * x)).samples
        scaled = scale * filt(make_series(x)).samples
        assert np.allclose(once, scaled, atol=1e-9 * max(1.0, abs(scale)))


def test_timeseries_validation():
    with pytest.raises(InvalidParameterError):
        TimeSeries(np.ones(4), 0.0)
    with pytest.raises(InvalidInputError):
        TimeSeries(np.ones((2, 2)), 256.0)
    s = TimeSeries(np.arange(4, dtype=float), 2.0, t0=1.0)
    assert np.array_equal(s.times(), [1.0, 1.5, 2.0, 2.5])
    assert s.duration_s == 2.0


def test_filters_keep_finite_input_finite():
    rng = np.random.default_rng(17)
    for _ in range(5):
        x = rng.standard_normal(400) * rng.uniform(0.01, 1e4)
        for filt in (bandpass_filter, notch_filter):
            out = filt(make_series(x)).samples
            assert np.all(np.isfinite(out))
