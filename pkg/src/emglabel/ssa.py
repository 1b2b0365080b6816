"""Singular Spectrum Analysis: embed, decompose, reconstruct.

A series of length N is embedded into an L x K Hankel trajectory matrix
(K = N - L + 1, column j holding samples j .. j+L-1). Its SVD yields
eigentriples (sigma_i, u_i, v_i); each rank-1 piece sigma_i u_i v_i^T maps
back to a series by diagonal averaging (exact mean over every anti-diagonal).
Summing elementary series over the leading eigentriples smooths; summing all
of them reproduces the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .signals import TimeSeries


@dataclass(frozen=True)
class SsaDecomposition:
    """Full SSA decomposition of one series.

    singular_values are non-increasing; components[i] is the elementary
    series of eigentriple i (length = original_len); their sum reproduces
    the decomposed series up to floating-point error.
    """

    window_len: int
    singular_values: np.ndarray
    components: np.ndarray  # shape (n_eigentriples, original_len)
    original_len: int

    @property
    def n_eigentriples(self) -> int:
        return len(self.singular_values)

    def reconstruct(self, rank: int) -> np.ndarray:
        """Sum of the elementary series of the `rank` largest singular values."""
        if not (1 <= rank <= self.n_eigentriples):
            raise InvalidParameterError(
                f"rank must be in [1, {self.n_eigentriples}], got {rank}"
            )
        return self.components[:rank].sum(axis=0)


def default_window_len(n: int) -> int:
    """Window default: half the series, capped to bound the SVD cost."""
    return min(n // 2, 128)


def ssa_decompose(s: TimeSeries, window_len: int | None = None) -> SsaDecomposition:
    """Decompose a series into its full set of SSA eigentriples."""
    x = s.samples
    n = len(x)
    if n < 3:
        raise InvalidInputError(f"series must have at least 3 samples, got {n}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("series contains non-finite values")
    L = default_window_len(n) if window_len is None else int(window_len)
    if not (1 < L < n):
        raise InvalidParameterError(f"window_len must satisfy 1 < L < {n}, got {L}")
    K = n - L + 1

    # column j = x[j : j+L]
    traj = np.lib.stride_tricks.sliding_window_view(x, L).T
    u, sigma, vt = np.linalg.svd(traj, full_matrices=False)

    # Anti-diagonal k of sigma * u v^T sums to sigma * conv(u, v)[k]; dividing
    # by the anti-diagonal lengths gives the exact per-diagonal mean.
    counts = np.convolve(np.ones(L), np.ones(K))
    components = np.empty((len(sigma), n))
    for i in range(len(sigma)):
        components[i] = sigma[i] * np.convolve(u[:, i], vt[i]) / counts

    return SsaDecomposition(
        window_len=L,
        singular_values=sigma,
        components=components,
        original_len=n,
    )


def ssa_denoise(
    s: TimeSeries, window_len: int | None = None, rank: int = 1
) -> TimeSeries:
    """Keep the `rank` strongest eigentriples; drop the rest as noise."""
    if rank < 1:
        raise InvalidParameterError(f"rank must be >= 1, got {rank}")
    dec = ssa_decompose(s, window_len)
    if rank > dec.n_eigentriples:
        raise InvalidParameterError(
            f"rank {rank} exceeds the {dec.n_eigentriples} available eigentriples"
        )
    return s.with_samples(dec.reconstruct(rank))
