"""Unitary grid transforms between the delay-Doppler, time-frequency and
time domains.

Grids are complex ``(M, N)`` arrays indexed ``[l, k]`` (delay, Doppler) in
the DD domain and ``[m, n]`` (subcarrier, slot) in the TF domain. Every
transform here is unitary; FFT-library scaling never leaks through.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sp_fft


def dft(x: np.ndarray, axis: int = -1, inverse: bool = False) -> np.ndarray:
    """Unitary DFT along ``axis``.

    Forward kernel ``exp(-j 2 pi q p / n) / sqrt(n)``; ``inverse=True`` flips
    the sign of the exponent.
    """
    x = np.asarray(x, dtype=complex)
    if inverse:
        return sp_fft.ifft(x, axis=axis, norm="ortho")
    return sp_fft.fft(x, axis=axis, norm="ortho")


def _as_grid(x, shape: tuple[int, int] | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D grid, got shape {x.shape}")
    if shape is not None and x.shape != tuple(shape):
        raise ValueError(f"grid shape {x.shape} does not match {tuple(shape)}")
    return x


def isfft(x_dd, shape: tuple[int, int] | None = None) -> np.ndarray:
    """DD grid -> TF grid.

    ``X_TF[m, n] = 1/sqrt(NM) sum_k sum_l X_DD[l, k] exp(j2pi(nk/N - ml/M))``:
    forward DFT over delay, inverse DFT over Doppler.
    """
    x_dd = _as_grid(x_dd, shape)
    return dft(dft(x_dd, axis=0), axis=1, inverse=True)


def sfft(y_tf, shape: tuple[int, int] | None = None) -> np.ndarray:
    """TF grid -> DD grid, the exact inverse of :func:`isfft`."""
    y_tf = _as_grid(y_tf, shape)
    return dft(dft(y_tf, axis=0, inverse=True), axis=1)


def dzt(x, M: int, N: int) -> np.ndarray:
    """Discrete Zak transform of an ``MN``-periodic sequence.

    ``DZ[l, k] = 1/sqrt(N) sum_n x[l + nM] exp(-j2pi nk/N)``
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.size != M * N:
        raise ValueError(f"sequence length {x.size} != M*N = {M * N}")
    # column n of the reshaped array holds x[nM : (n+1)M]
    return dft(x.reshape(N, M).T, axis=1)


def idzt(z, M: int | None = None, N: int | None = None) -> np.ndarray:
    """Inverse discrete Zak transform, returning one period of length ``MN``."""
    z = _as_grid(z, None if M is None else (M, N))
    return dft(z, axis=1, inverse=True).T.reshape(-1)
