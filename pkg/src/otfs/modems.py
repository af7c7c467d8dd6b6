"""SFFT-based and DZT-based OTFS transceivers, and a plain CP-OFDM reference.

Time-domain samples use one amplitude convention throughout: a sample holds
``s(t) * sqrt(T / M)``. At ``Q = 1`` this makes both modulators unitary for
rectangular pulses, and it keeps the oversampled streams consistent with the
critically sampled ones (decimating a ``Q = 2`` stream by 2 gives the
``Q = 1`` stream).
"""

from __future__ import annotations

import math

import numpy as np

from .channel import TDSequence, add_awgn, apply_channel
from .config import OtfsConfig
from .pulses import Pulse, pulse_dzt, rect, sample_pulse
from .transforms import _as_grid, dzt, idzt, isfft, sfft

ARCHS = ("sfft", "dzt")


def _with_cp(body: np.ndarray, cp_len: int, block_len: int) -> np.ndarray:
    blocks = body.reshape(-1, block_len)
    if cp_len:
        blocks = np.concatenate([blocks[:, block_len - cp_len:], blocks], axis=1)
    return blocks.reshape(-1)


def _body(r: TDSequence | np.ndarray, cfg: OtfsConfig) -> np.ndarray:
    body = r.body() if isinstance(r, TDSequence) else np.asarray(r, dtype=complex)
    if body.size != cfg.body_len:
        raise ValueError(f"body has {body.size} samples, expected M*N*Q = {cfg.body_len}")
    return body


def heisenberg(x_tf: np.ndarray, g_tx: Pulse, cfg: OtfsConfig) -> np.ndarray:
    """Discrete multicarrier modulation of a TF grid into ``MNQ`` body samples."""
    M, N, n = cfg.M, cfg.N, cfg.samples_per_slot
    x_tf = _as_grid(x_tf, cfg.shape)
    padded = np.zeros((n, N), dtype=complex)
    padded[:M] = x_tf
    # column n, sample p: sum_m X_TF[m, n] exp(j2pi m p / (MQ))
    carriers = np.fft.ifft(padded, axis=0) * n
    g = sample_pulse(g_tx, cfg)[:, None]
    return (math.sqrt(cfg.T / M) * g * carriers).T.reshape(-1)


def wigner(body: np.ndarray, g_rx: Pulse, cfg: OtfsConfig) -> np.ndarray:
    """Matched multicarrier demodulation of ``MNQ`` body samples to a TF grid."""
    M, N, n = cfg.M, cfg.N, cfg.samples_per_slot
    slots = body.reshape(N, n).T
    g = sample_pulse(g_rx, cfg)[:, None]
    spectra = np.fft.fft(slots * np.conj(g), axis=0)
    return math.sqrt(cfg.T / M) / cfg.oversampling * spectra[:M]


def sfft_modulate(
    x_dd, g_tx: Pulse | None = None, cfg: OtfsConfig = None, cp_mode: str = "frame"
) -> TDSequence:
    """ISFFT followed by the Heisenberg transform.

    ``cp_mode="frame"`` prepends one ``cp_len`` CP to the whole frame;
    ``"symbol"`` prepends one to every slot (the OFDM-compatible layout).
    """
    g_tx = g_tx or rect(cfg.T)
    body = heisenberg(isfft(x_dd, cfg.shape), g_tx, cfg)
    block = _block_len(cp_mode, cfg)
    return TDSequence(
        _with_cp(body, cfg.cp_len, block), cfg.sample_rate, cfg.cp_len, block,
        {"arch": "sfft", "cp_mode": cp_mode},
    )


def sfft_demodulate(r: TDSequence | np.ndarray, g_rx: Pulse | None = None, cfg: OtfsConfig = None) -> np.ndarray:
    """Wigner transform followed by the SFFT."""
    g_rx = g_rx or rect(cfg.T)
    return sfft(wigner(_body(r, cfg), g_rx, cfg))


def _block_len(cp_mode: str, cfg: OtfsConfig) -> int:
    if cp_mode == "frame":
        return cfg.body_len
    if cp_mode == "symbol":
        return cfg.samples_per_slot
    raise ValueError(f"cp_mode must be 'frame' or 'symbol', got {cp_mode!r}")


def zak_samples(x_dd, g_tx: Pulse, cfg: OtfsConfig) -> np.ndarray:
    """``x_TD[l + nM] = sqrt(M) sum_k X[l, k] DZ_g[l, k] exp(j2pi nk/N)``."""
    M, N = cfg.shape
    x_dd = _as_grid(x_dd, cfg.shape)
    # idzt carries 1/sqrt(N); the sum above has none
    return math.sqrt(M * N) * idzt(x_dd * pulse_dzt(g_tx, cfg), M, N)


def hold(x_td: np.ndarray, Q: int) -> np.ndarray:
    """Rectangular-kernel DAC on the ``Q``-times oversampled grid.

    Sample ``i`` holds over ``[(i - 1/2) T/M, (i + 1/2) T/M)``; the tail of the
    frame wraps to sample 0 of the next period.
    """
    if Q == 1:
        return np.asarray(x_td, dtype=complex).copy()
    p = np.arange(x_td.size * Q)
    src = np.floor(p / Q + 0.5).astype(int) % x_td.size
    return np.asarray(x_td, dtype=complex)[src]


def dzt_modulate(x_dd, g_tx: Pulse | None = None, cfg: OtfsConfig = None) -> TDSequence:
    """IDZT-domain pulse shaping, sample-and-hold DAC, whole-frame CP."""
    g_tx = g_tx or rect(cfg.T)
    body = hold(zak_samples(x_dd, g_tx, cfg), cfg.oversampling)
    return TDSequence(
        _with_cp(body, cfg.cp_len, body.size), cfg.sample_rate, cfg.cp_len, body.size,
        {"arch": "dzt", "cp_mode": "frame"},
    )


def dzt_demodulate(r: TDSequence | np.ndarray, g_rx: Pulse | None = None, cfg: OtfsConfig = None) -> np.ndarray:
    """ADC at ``t = lT/M + nT``, DZT, then ``sqrt(MN) DZ_y conj(DZ_grx)``."""
    g_rx = g_rx or rect(cfg.T)
    M, N = cfg.shape
    y_td = _body(r, cfg)[:: cfg.oversampling]
    return math.sqrt(M * N) * dzt(y_td, M, N) * np.conj(pulse_dzt(g_rx, cfg))


def modulate(arch: str, x_dd, g_tx: Pulse | None, cfg: OtfsConfig) -> TDSequence:
    if arch == "sfft":
        return sfft_modulate(x_dd, g_tx, cfg)
    if arch == "dzt":
        return dzt_modulate(x_dd, g_tx, cfg)
    raise ValueError(f"unknown architecture {arch!r}; expected one of {ARCHS}")


def demodulate(arch: str, r: TDSequence, g_rx: Pulse | None, cfg: OtfsConfig) -> np.ndarray:
    if arch == "sfft":
        return sfft_demodulate(r, g_rx, cfg)
    if arch == "dzt":
        return dzt_demodulate(r, g_rx, cfg)
    raise ValueError(f"unknown architecture {arch!r}; expected one of {ARCHS}")


def run_chain(
    arch: str,
    x_dd,
    cfg: OtfsConfig,
    channel=None,
    g_tx: Pulse | None = None,
    g_rx: Pulse | None = None,
    noise_variance: float = 0.0,
    seed=None,
    frame_start_time: float = 0.0,
) -> np.ndarray:
    """Modulate, pass through the channel (if any) and AWGN, demodulate."""
    s = modulate(arch, x_dd, g_tx, cfg)
    r = apply_channel(s, channel, cfg, frame_start_time) if channel is not None else s
    if noise_variance:
        r = add_awgn(r, noise_variance, seed)
    return demodulate(arch, r, g_rx, cfg)


# ---------------------------------------------------------------------------
# CP-OFDM reference, deliberately written against numpy.fft only


def ofdm_modulate(x_freq: np.ndarray, cp_len: int = 0) -> np.ndarray:
    """CP-OFDM: unitary M-point IDFT per column, per-symbol CP, serialized."""
    x_freq = np.atleast_2d(np.asarray(x_freq, dtype=complex).T).T
    M = x_freq.shape[0]
    if cp_len >= M or cp_len < 0:
        raise ValueError("cp_len must lie in [0, M)")
    sym = np.fft.ifft(x_freq, axis=0) * np.sqrt(M)
    sym = np.vstack([sym[M - cp_len:], sym])
    return sym.T.reshape(-1)


def ofdm_demodulate(samples: np.ndarray, M: int, cp_len: int = 0) -> np.ndarray:
    """Inverse of :func:`ofdm_modulate`; returns an ``(M, n_symbols)`` array."""
    samples = np.asarray(samples, dtype=complex)
    if samples.size % (M + cp_len):
        raise ValueError(f"{samples.size} samples is not a multiple of M + cp_len = {M + cp_len}")
    sym = samples.reshape(-1, M + cp_len)[:, cp_len:].T
    return np.fft.fft(sym, axis=0) / np.sqrt(M)
