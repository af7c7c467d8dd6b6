"""Constellation mapping and linear MMSE detection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.special

from .effective import EffectiveChannel


class SingularChannelError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class SymbolMap:
    """Gray-labelled unit-energy constellation: ``"bpsk"``, ``"qpsk"`` or ``"16qam"``."""

    constellation: str = "qpsk"

    def __post_init__(self):
        name = self.constellation.lower()
        if name not in ("bpsk", "qpsk", "16qam"):
            raise ValueError(f"unknown constellation {self.constellation!r}")
        object.__setattr__(self, "constellation", name)

    @property
    def bits_per_symbol(self) -> int:
        return {"bpsk": 1, "qpsk": 2, "16qam": 4}[self.constellation]

    @cached_property
    def points(self) -> np.ndarray:
        """Constellation indexed by the integer value of each bit label (MSB first)."""
        b = self.bits_per_symbol
        labels = (np.arange(2**b)[:, None] >> np.arange(b - 1, -1, -1)) & 1
        return self._map_rows(labels)

    def _map_rows(self, bits: np.ndarray) -> np.ndarray:
        if self.constellation == "bpsk":
            return (1.0 - 2.0 * bits[:, 0]).astype(complex)
        if self.constellation == "qpsk":
            return ((1.0 - 2.0 * bits[:, 0]) + 1j * (1.0 - 2.0 * bits[:, 1])) / math.sqrt(2)
        pam = np.array([[-3, -1], [3, 1]], dtype=float)  # indexed [b0, b1]
        re = pam[bits[:, 0], bits[:, 1]]
        im = pam[bits[:, 2], bits[:, 3]]
        return (re + 1j * im) / math.sqrt(10)


def map_bits(bits, smap: SymbolMap, shape: tuple[int, int]) -> np.ndarray:
    """Gray-map ``bits`` onto an ``(M, N)`` grid; symbol ``i`` lands at flat index ``i``."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    M, N = shape
    need = M * N * smap.bits_per_symbol
    if bits.size != need:
        raise ValueError(f"need {need} bits for a {M}x{N} grid, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    return smap._map_rows(bits.reshape(-1, smap.bits_per_symbol)).reshape(M, N)


def demap_symbols(grid, smap: SymbolMap) -> np.ndarray:
    """Minimum-distance hard decisions, returned as a flat bit array."""
    sym = np.asarray(grid, dtype=complex).reshape(-1)
    idx = np.argmin(np.abs(sym[:, None] - smap.points[None, :]), axis=1)
    b = smap.bits_per_symbol
    return ((idx[:, None] >> np.arange(b - 1, -1, -1)) & 1).astype(np.int8).reshape(-1)


def mmse_equalize(y_dd, H: EffectiveChannel | np.ndarray, noise_variance: float) -> np.ndarray:
    """``x = (H^H H + s2 I)^-1 H^H y`` via a Cholesky solve."""
    if noise_variance < 0:
        raise ValueError("noise variance must be non-negative")
    y_dd = np.asarray(y_dd, dtype=complex)
    mat = H.matrix if isinstance(H, EffectiveChannel) else np.asarray(H, dtype=complex)
    n = y_dd.size
    if mat.shape != (n, n):
        raise ValueError(f"operator shape {mat.shape} does not match {n} grid entries")
    gram = mat.conj().T @ mat
    if noise_variance == 0 and np.linalg.matrix_rank(mat) < n:
        raise SingularChannelError("channel operator is rank-deficient and no regularization was given")
    gram[np.diag_indices(n)] += noise_variance
    try:
        factor = scipy.linalg.cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularChannelError(f"regularized system is singular: {exc}") from exc
    x = scipy.linalg.cho_solve(factor, mat.conj().T @ y_dd.reshape(-1))
    return x.reshape(y_dd.shape)


def ber_count(tx_bits, rx_bits) -> tuple[int, int, float]:
    tx_bits = np.asarray(tx_bits).reshape(-1)
    rx_bits = np.asarray(rx_bits).reshape(-1)
    if tx_bits.size != rx_bits.size:
        raise ValueError(f"bit streams differ in length: {tx_bits.size} vs {rx_bits.size}")
    errors = int(np.count_nonzero(tx_bits != rx_bits))
    total = int(tx_bits.size)
    return errors, total, (errors / total if total else 0.0)


def noise_variance_for_ebn0(ebn0_db: float, smap: SymbolMap) -> float:
    """DD-domain noise variance for unit-energy symbols at the given Eb/N0."""
    return 1.0 / (smap.bits_per_symbol * 10 ** (ebn0_db / 10))


def qfunc(x):
    return 0.5 * scipy.special.erfc(np.asarray(x) / math.sqrt(2))

