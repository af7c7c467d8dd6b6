"""Delay-Doppler path channel acting on sampled time-domain signals, plus AWGN."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import OtfsConfig

INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class ChannelPath:
    gain: complex
    tau: float
    nu: float


@dataclass(frozen=True)
class ChannelSpec:
    """List of ``(gain, delay [s], Doppler [Hz])`` paths.

    ``tau_max`` / ``nu_max`` default to the largest delay and absolute
    Doppler among the paths.
    """

    paths: tuple[ChannelPath, ...] = ()
    tau_max: float | None = None
    nu_max: float | None = None

    def __post_init__(self):
        paths = tuple(
            p if isinstance(p, ChannelPath) else ChannelPath(complex(p[0]), float(p[1]), float(p[2]))
            for p in self.paths
        )
        object.__setattr__(self, "paths", paths)
        if self.tau_max is None:
            object.__setattr__(self, "tau_max", max((p.tau for p in paths), default=0.0))
        if self.nu_max is None:
            object.__setattr__(self, "nu_max", max((abs(p.nu) for p in paths), default=0.0))
        for p in paths:
            if not 0.0 <= p.tau <= self.tau_max * (1 + 1e-12):
                raise ValueError(f"path delay {p.tau} outside [0, {self.tau_max}]")
            if abs(p.nu) > self.nu_max * (1 + 1e-12):
                raise ValueError(f"path Doppler {p.nu} outside [-{self.nu_max}, {self.nu_max}]")

    @property
    def P(self) -> int:
        return len(self.paths)

    def to_dict(self) -> dict:
        return {
            "paths": [
                {"gain_re": p.gain.real, "gain_im": p.gain.imag, "tau": p.tau, "nu": p.nu}
                for p in self.paths
            ]
        }


@dataclass(frozen=True)
class NormalizedPath:
    gain: complex
    l: float
    k: float
    is_integer_delay: bool
    is_integer_doppler: bool

    @property
    def is_integer(self) -> bool:
        return self.is_integer_delay and self.is_integer_doppler


def from_taps(taps, cfg: OtfsConfig) -> ChannelSpec:
    """Channel from ``(gain, l_i, k_i)`` triples in delay/Doppler bins."""
    return ChannelSpec(
        tuple(
            ChannelPath(complex(h), float(l) / (cfg.M * cfg.delta_f), float(k) / (cfg.N * cfg.T))
            for h, l, k in taps
        )
    )


def channel_from_dict(data: dict) -> ChannelSpec:
    if set(data) - {"paths", "tau_max", "nu_max"}:
        raise ValueError(f"unknown channel keys: {sorted(set(data) - {'paths', 'tau_max', 'nu_max'})}")
    paths = []
    for entry in data.get("paths", []):
        extra = set(entry) - {"gain_re", "gain_im", "tau", "nu"}
        if extra:
            raise ValueError(f"unknown path keys: {sorted(extra)}")
        gain = complex(entry.get("gain_re", 0.0), entry.get("gain_im", 0.0))
        paths.append(ChannelPath(gain, float(entry["tau"]), float(entry["nu"])))
    return ChannelSpec(tuple(paths), data.get("tau_max"), data.get("nu_max"))


def load_channel(path: str | Path) -> ChannelSpec:
    with open(path) as fh:
        return channel_from_dict(json.load(fh))


PRESETS = {
    # gain [dB], phase [rad], delay [bins], Doppler [bins]
    "evA-like-3path": [(0.0, 0.0, 0, 0), (-1.5, 0.9, 1, 1), (-3.0, -2.1, 2, -1)],
}


def preset(name: str, cfg: OtfsConfig) -> ChannelSpec:
    """Named on-grid demo channel scaled to ``cfg``; total power is 1."""
    try:
        rows = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown channel preset {name!r}; known: {sorted(PRESETS)}") from None
    powers = np.array([10 ** (db / 10) for db, *_ in rows])
    amps = np.sqrt(powers / powers.sum())
    taps = [(a * np.exp(1j * ph), l, k) for a, (_, ph, l, k) in zip(amps, rows)]
    return from_taps(taps, cfg)


def normalize(ch: ChannelSpec, cfg: OtfsConfig) -> list[NormalizedPath]:
    """Per-path delay taps ``l_i = tau_i M delta_f`` and Doppler bins ``k_i = nu_i N T``."""
    out = []
    for p in ch.paths:
        l = p.tau * cfg.M * cfg.delta_f
        k = p.nu * cfg.N * cfg.T
        if l >= cfg.M:
            raise ValueError(f"delay tap {l:g} exceeds the frame delay span M = {cfg.M}")
        out.append(
            NormalizedPath(
                p.gain, l, k,
                abs(l - round(l)) <= INTEGER_TOL,
                abs(k - round(k)) <= INTEGER_TOL,
            )
        )
    return out


def default_cp_len(ch: ChannelSpec, cfg: OtfsConfig) -> int:
    """``ceil(tau_max M Q delta_f)`` samples."""
    return int(math.ceil(ch.tau_max * cfg.sample_rate - INTEGER_TOL))


def sample_delay(tau: float, cfg: OtfsConfig) -> int:
    d = tau * cfg.sample_rate
    if abs(d - round(d)) > INTEGER_TOL:
        raise ValueError(
            f"delay {tau:g} s is {d:g} samples, not an integer; fractional delays are "
            "only supported by the analytic effective channel (otfs.effective)"
        )
    return int(round(d))


@dataclass
class TDSequence:
    """Sampled time-domain signal.

    ``samples`` is a run of blocks, each ``cp_len`` prefix samples followed by
    ``block_len`` body samples. A whole-frame CP is a single block of
    ``M N Q`` samples; a per-symbol CP has ``N`` blocks of ``M Q``.
    """

    samples: np.ndarray
    sample_rate: float
    cp_len: int = 0
    block_len: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.block_len is None:
            self.block_len = self.samples.size - self.cp_len
        if self.samples.size % (self.cp_len + self.block_len):
            raise ValueError("sample count is not a whole number of CP+body blocks")

    @property
    def n_blocks(self) -> int:
        return self.samples.size // (self.cp_len + self.block_len)

    def body(self) -> np.ndarray:
        blocks = self.samples.reshape(self.n_blocks, self.cp_len + self.block_len)
        return blocks[:, self.cp_len:].reshape(-1)

    def sample_times(self, frame_start_time: float = 0.0) -> np.ndarray:
        """Absolute times; the first body sample sits at ``frame_start_time``."""
        return frame_start_time + (np.arange(self.samples.size) - self.cp_len) / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> TDSequence:
        return TDSequence(samples, self.sample_rate, self.cp_len, self.block_len, dict(self.meta))


def apply_channel(
    s: TDSequence, ch: ChannelSpec, cfg: OtfsConfig, frame_start_time: float = 0.0
) -> TDSequence:
    """``r[p] = sum_i h_i s[p - d_i] exp(j2pi nu_i (t_p - tau_i))``.

    Delays must be whole samples. Samples before the start of the
    transmission are zero, so the CP absorbs the delay spread.
    """
    x = s.samples
    t = s.sample_times(frame_start_time)
    r = np.zeros_like(x)
    for p in ch.paths:
        d = sample_delay(p.tau, cfg)
        if d >= x.size:
            continue
        shifted = np.concatenate([np.zeros(d, dtype=complex), x[: x.size - d]])
        r += p.gain * shifted * np.exp(2j * np.pi * p.nu * (t - p.tau))
    return s.with_samples(r)


def add_awgn(r: TDSequence, noise_variance: float, seed=None) -> TDSequence:
    """Add circularly-symmetric complex Gaussian noise of variance ``noise_variance``."""
    if noise_variance < 0:
        raise ValueError("noise variance must be non-negative")
    if noise_variance == 0:
        return r.with_samples(r.samples.copy())
    rng = np.random.default_rng(seed)
    n = r.samples.size
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return r.with_samples(r.samples + math.sqrt(noise_variance / 2) * noise)
