"""Delay-Doppler effective channel models.

Three independent routes to the ``MN x MN`` DD-domain operator:

* :func:`build_analytic` sums pulse ambiguity samples per path,
* :func:`closed_form_io` is the 2-D circular convolution with a phase mask
  (rectangular pulses, on-grid paths only),
* :func:`probe_operator` pushes unit impulses through a simulated chain.

Index order is ``[l, k, l', k']`` (output delay, output Doppler, input
delay, input Doppler). The flattened operator maps ``X.reshape(-1)`` to
``Y.reshape(-1)``, i.e. row ``l*N + k`` and column ``l'*N + k'``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, normalize
from .config import OtfsConfig
from .modems import run_chain
from .pulses import Pulse, ambiguity, rect, sampled_ambiguity
from .transforms import _as_grid

ANALYTIC_BUDGET = 256
KERNELS = ("sampled", "continuous")


@dataclass
class EffectiveChannel:
    tensor: np.ndarray

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, M: int, N: int) -> EffectiveChannel:
        return cls(np.asarray(matrix, dtype=complex).reshape(M, N, M, N))

    @property
    def shape(self) -> tuple[int, int]:
        return self.tensor.shape[:2]

    @property
    def matrix(self) -> np.ndarray:
        M, N = self.shape
        return self.tensor.reshape(M * N, M * N)

    def apply(self, x_dd) -> np.ndarray:
        x_dd = _as_grid(x_dd, self.shape)
        return (self.matrix @ x_dd.reshape(-1)).reshape(self.shape)


def relative_frobenius(a, b) -> float:
    """``||A - B||_F / ||B||_F`` (absolute error when ``B`` is zero)."""
    a = a.matrix if isinstance(a, EffectiveChannel) else np.asarray(a)
    b = b.matrix if isinstance(b, EffectiveChannel) else np.asarray(b)
    ref = np.linalg.norm(b)
    err = np.linalg.norm(a - b)
    return float(err / ref) if ref > 0 else float(err)


def _ambiguity_fn(g_tx: Pulse, g_rx: Pulse, cfg: OtfsConfig, kernel: str):
    if kernel == "sampled":
        return lambda tau, nu: sampled_ambiguity(g_tx, g_rx, tau, nu, cfg)
    if kernel == "continuous":
        return np.vectorize(lambda tau, nu: ambiguity(g_tx, g_rx, float(tau), float(nu)), otypes=[complex])
    raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def sampling_function(
    l: int, k: int, lp: int, kp: int,
    l_i: float, k_i: float,
    cfg: OtfsConfig,
    g_tx: Pulse | None = None,
    g_rx: Pulse | None = None,
    *,
    kernel: str = "sampled",
    skip_same_subcarrier: bool = False,
) -> complex:
    """DD sampling function ``w(l, k, l', k', l_i, k_i)`` by direct summation.

    The first ambiguity term (same slot) runs over every ``m'``; the second
    (previous slot, reached through the cyclic prefix) carries the
    ``exp(-j2pi k'/N)`` wrap factor. ``skip_same_subcarrier=True`` drops the
    ``m' == m`` terms of the first sum, which breaks the identity channel and
    exists only so that variant can be checked.
    """
    M, N = cfg.shape
    g_tx = g_tx or rect(cfg.T)
    g_rx = g_rx or rect(cfg.T)
    amb = _ambiguity_fn(g_tx, g_rx, cfg, kernel)
    tau_i = l_i / (M * cfg.delta_f)
    nu_i = k_i / (N * cfg.T)

    m = np.arange(M)
    d = (m[:, None] - m[None, :]) * cfg.delta_f - nu_i  # [m, m']
    a_same = amb(np.full(d.shape, -tau_i), d)
    a_prev = amb(np.full(d.shape, cfg.T - tau_i), d)
    if skip_same_subcarrier:
        a_same = a_same * (1 - np.eye(M))
    inner = a_same + np.exp(-2j * np.pi * kp / N) * a_prev
    sub_phase = np.exp(2j * np.pi * (m[:, None] * l - m[None, :] * lp - m[None, :] * l_i) / M)
    slot_phase = np.exp(-2j * np.pi * np.arange(N) * (k - kp - k_i) / N)
    return complex(np.sum(slot_phase) * np.sum(inner * sub_phase) / (N * M))


def _path_tensor(l_i: float, k_i: float, cfg: OtfsConfig, amb) -> np.ndarray:
    M, N = cfg.shape
    tau_i = l_i / (M * cfg.delta_f)
    nu_i = k_i / (N * cfg.T)
    diffs = np.arange(-(M - 1), M)
    nu = diffs * cfg.delta_f - nu_i
    a_same = amb(np.full(nu.shape, -tau_i), nu)
    a_prev = amb(np.full(nu.shape, cfg.T - tau_i), nu)

    m = np.arange(M)
    idx = m[:, None] - m[None, :] + (M - 1)  # Toeplitz lookup, [m, m']
    left = np.exp(2j * np.pi * np.outer(m, m) / M)  # [l, m]
    right = np.exp(-2j * np.pi * np.outer(m, m + l_i) / M)  # [m', l']
    b_same = left @ a_same[idx] @ right
    b_prev = left @ a_prev[idx] @ right

    n = np.arange(N)
    kk = n[:, None] - n[None, :] - k_i  # [k, k']
    slot = np.exp(-2j * np.pi * np.multiply.outer(kk, n) / N).sum(axis=-1)
    wrap = np.exp(-2j * np.pi * n / N)  # [k']
    w = (
        np.einsum("ab,cd->acbd", b_same, slot)
        + np.einsum("ab,cd,d->acbd", b_prev, slot, wrap)
    )
    return w / (N * M)


def build_analytic(
    ch: ChannelSpec,
    cfg: OtfsConfig,
    g_tx: Pulse | None = None,
    g_rx: Pulse | None = None,
    *,
    kernel: str = "sampled",
    budget: int = ANALYTIC_BUDGET,
) -> EffectiveChannel:
    """``H[l, k, l', k'] = sum_i h_i w(l, k, l', k', l_i, k_i) exp(-j2pi nu_i tau_i)``.

    ``kernel="sampled"`` evaluates the ambiguity function with the system's
    sampling grid and reproduces the simulated modems to round-off;
    ``"continuous"`` uses the analog integral. Fractional delays are
    accepted here (and only here).
    """
    M, N = cfg.shape
    if M * N > budget:
        warnings.warn(
            f"M*N = {M * N} exceeds the analytic budget {budget}; "
            "probe_operator scales better",
            stacklevel=2,
        )
    g_tx = g_tx or rect(cfg.T)
    g_rx = g_rx or rect(cfg.T)
    amb = _ambiguity_fn(g_tx, g_rx, cfg, kernel)
    tensor = np.zeros((M, N, M, N), dtype=complex)
    for path, norm in zip(ch.paths, normalize(ch, cfg)):
        tensor += path.gain * _path_tensor(norm.l, norm.k, cfg, amb) * np.exp(
            -2j * np.pi * path.nu * path.tau
        )
    return EffectiveChannel(tensor)


def _check_integer(value, name: str) -> np.ndarray:
    arr = np.asarray(value)
    if not np.all(np.abs(arr - np.round(arr)) <= 1e-9):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    return np.round(arr).astype(int)


def phase_rotation(l, k, l_i, k_i, cfg: OtfsConfig) -> np.ndarray:
    """Phase mask of the circular-convolution relation (broadcasts over ``l, k``)."""
    M, N = cfg.shape
    l_i = int(_check_integer(l_i, "l_i"))
    k_i = int(_check_integer(k_i, "k_i"))
    l = _check_integer(l, "l")
    k = _check_integer(k, "k")
    if not 0 <= l_i < M:
        raise ValueError(f"l_i must lie in [0, {M}), got {l_i}")
    top = ((l - l_i) % M) * k_i
    bottom = top - k_i * M - ((k - k_i) % N) * M
    return np.exp(2j * np.pi * np.where(l >= l_i, top, bottom) / (M * N))


def closed_form_io(x_dd, ch: ChannelSpec, cfg: OtfsConfig) -> np.ndarray:
    """``Y[l, k] = sum_i h_i X[(l - l_i)_M, (k - k_i)_N] alpha[l, k, l_i, k_i]``."""
    M, N = cfg.shape
    x_dd = _as_grid(x_dd, cfg.shape)
    l, k = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
    y = np.zeros_like(x_dd)
    for norm in normalize(ch, cfg):
        if not norm.is_integer:
            raise ValueError(
                f"path (l_i, k_i) = ({norm.l:g}, {norm.k:g}) is off-grid; "
                "use build_analytic for fractional paths"
            )
        li, ki = int(round(norm.l)), int(round(norm.k))
        y += norm.gain * np.roll(x_dd, (li, ki), axis=(0, 1)) * phase_rotation(l, k, li, ki, cfg)
    return y


def closed_form_operator(ch: ChannelSpec, cfg: OtfsConfig) -> EffectiveChannel:
    M, N = cfg.shape
    eye = np.eye(M * N, dtype=complex)
    cols = [closed_form_io(eye[j].reshape(M, N), ch, cfg).reshape(-1) for j in range(M * N)]
    return EffectiveChannel.from_matrix(np.stack(cols, axis=1), M, N)


def probe_operator(
    arch: str,
    ch: ChannelSpec | None,
    cfg: OtfsConfig,
    g_tx: Pulse | None = None,
    g_rx: Pulse | None = None,
) -> EffectiveChannel:
    """End-to-end operator of a noiseless simulated chain, one impulse per column."""
    M, N = cfg.shape
    eye = np.eye(M * N, dtype=complex)
    cols = [
        run_chain(arch, eye[j].reshape(M, N), cfg, ch, g_tx, g_rx).reshape(-1)
        for j in range(M * N)
    ]
    return EffectiveChannel.from_matrix(np.stack(cols, axis=1), M, N)


def doppler_spread(column: np.ndarray, M: int, N: int, threshold: float = 1e-3) -> np.ndarray:
    """Per delay tap, the number of Doppler bins of an operator column above ``threshold``."""
    return np.sum(np.abs(np.asarray(column).reshape(M, N)) > threshold, axis=1)


def max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0


__all__ = [
    "EffectiveChannel", "build_analytic", "closed_form_io", "closed_form_operator",
    "doppler_spread", "max_abs", "phase_rotation", "probe_operator",
    "relative_frobenius", "sampling_function",
]
