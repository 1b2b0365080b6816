import numpy as np
import pytest
from scipy import linalg as sla

from emglabel.errors import InvalidParameterError
from emglabel.ssa import default_window_len, ssa_decompose, ssa_denoise

from conftest import make_series


def trajectory_matrix(x, L):
    """Independent construction: column j holds x[j : j+L]."""
    K = len(x) - L + 1
    return np.column_stack([x[j : j + L] for j in range(K)])


class TestDecompose:
    def test_constant_series_is_rank_one(self):
        s = make_series([5.0] * 5)
        dec = ssa_decompose(s, window_len=2)
        sv = dec.singular_values
        assert sv[0] > 0
        assert np.all(sv[1:] < 1e-9 * sv[0])
        assert np.allclose(dec.components[0], 5.0, atol=1e-9)

    def test_sinusoid_energy_in_two_components(self):
        t = np.arange(256) / 256.0
        s = make_series(np.sin(2 * np.pi * 8 * t))
        dec = ssa_decompose(s, window_len=64)
        sv = dec.singular_values
        # independent oracle: scipy SVD of an explicitly built trajectory matrix
        oracle_sv = sla.svdvals(trajectory_matrix(s.samples, 64))
        assert np.allclose(sv, oracle_sv, rtol=1e-9, atol=1e-9)
        energy = sv**2
        assert energy[:2].sum() / energy.sum() > 0.999

    @pytest.mark.parametrize("seed,n,L", [(0, 50, 10), (1, 128, 64), (2, 31, 2), (3, 64, 30)])
    def test_completeness(self, seed, n, L):
        x = np.random.default_rng(seed).standard_normal(n)
        dec = ssa_decompose(make_series(x), window_len=L)
        recon = dec.components.sum(axis=0)
        assert np.linalg.norm(recon - x) <= 1e-6 * np.linalg.norm(x)

    def test_singular_values_sorted_nonnegative(self):
        x = np.random.default_rng(9).standard_normal(80)
        sv = ssa_decompose(make_series(x), window_len=20).singular_values
        assert np.all(sv >= 0)
        assert np.all(np.diff(sv) <= 1e-12)

    def test_window_validation(self):
        s = make_series(np.arange(10.0))
        for bad in (1, 10, 11, 0):
            with pytest.raises(InvalidParameterError):
                ssa_decompose(s, window_len=bad)

    def test_default_window(self):
        assert default_window_len(100) == 50
        assert default_window_len(1000) == 128


class TestDenoise:
    def test_constant_rank1_identity(self):
        s = make_series([3.0] * 40)
        out = ssa_denoise(s, rank=1)
        assert np.allclose(out.samples, 3.0, atol=1e-9)

    def test_noisy_sinusoid_rmse_drops(self):
        rng = np.random.default_rng(42)
        t = np.arange(512) / 256.0
        clean = np.sin(2 * np.pi * 2 * t)
        noisy = clean + rng.normal(0, 0.3, len(t))
        out = ssa_denoise(make_series(noisy), window_len=128, rank=2).samples
        rmse_out = np.sqrt(np.mean((out - clean) ** 2))
        rmse_in = np.sqrt(np.mean((noisy - clean) ** 2))
        assert rmse_out < rmse_in

    def test_smooths_noisy_angle_trace(self):
        # pulse-train angle trace: reconstruction must be smoother than input
        rng = np.random.default_rng(5)
        t = np.arange(1024) / 256.0
        trace = 20 + 45 * (1 - np.cos(2 * np.pi * t)) * (t < 2.0)
        noisy = trace + rng.normal(0, 2.0, len(t))
        out = ssa_denoise(make_series(noisy), rank=1).samples
        assert np.max(np.abs(np.diff(out))) < np.max(np.abs(np.diff(noisy)))

    def test_full_rank_reproduces_input(self):
        x = np.random.default_rng(11).standard_normal(60)
        dec = ssa_decompose(make_series(x), window_len=15)
        out = ssa_denoise(make_series(x), window_len=15, rank=dec.n_eigentriples)
        assert np.linalg.norm(out.samples - x) <= 1e-6 * np.linalg.norm(x)

    def test_rank_validation(self):
        s = make_series(np.arange(20.0))
        with pytest.raises(InvalidParameterError):
            ssa_denoise(s, window_len=5, rank=0)
        with pytest.raises(InvalidParameterError):
            ssa_denoise(s, window_len=5, rank=6)  # only 5 eigentriples
