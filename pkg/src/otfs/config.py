"""Frame parameters for an OTFS frame and the mobility helpers that size them."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

C_APPROX = 3e8
C_EXACT = 299_792_458.0

_REL_TOL = 1e-12


class ConfigError(ValueError):
    """Raised when a frame configuration violates an invariant."""


@dataclass(frozen=True)
class OtfsConfig:
    """Frame-level parameters.

    ``M`` delay bins (subcarriers) and ``N`` Doppler bins (slots), subcarrier
    spacing ``delta_f`` in Hz and slot duration ``T`` in s. Critical sampling
    ``T * delta_f == 1`` is required. ``oversampling`` is the number of samples
    per delay bin used by the sampled-time path.
    """

    M: int
    N: int
    delta_f: float
    T: float
    carrier_freq: float = 0.0
    cp_len: int = 0
    oversampling: int = 1

    @property
    def Q(self) -> int:
        return self.oversampling

    @property
    def bandwidth(self) -> float:
        """B_OTFS = M * delta_f."""
        return self.M * self.delta_f

    @property
    def frame_duration(self) -> float:
        """T_OTFS = N * T."""
        return self.N * self.T

    @property
    def sample_rate(self) -> float:
        return self.M * self.oversampling * self.delta_f

    @property
    def sample_period(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def samples_per_slot(self) -> int:
        return self.M * self.oversampling

    @property
    def body_len(self) -> int:
        return self.M * self.N * self.oversampling

    @property
    def shape(self) -> tuple[int, int]:
        return (self.M, self.N)

    def replace(self, **changes) -> OtfsConfig:
        return validate(dataclasses.replace(self, **changes))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def validate(cfg: OtfsConfig) -> OtfsConfig:
    """Check every invariant of ``cfg`` and return it unchanged."""
    for name in ("M", "N", "oversampling"):
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    if isinstance(cfg.cp_len, bool) or not isinstance(cfg.cp_len, int) or cfg.cp_len < 0:
        raise ConfigError(f"cp_len must be a non-negative integer, got {cfg.cp_len!r}")
    if not (cfg.delta_f > 0 and cfg.T > 0):
        raise ConfigError("delta_f and T must be positive")
    product = cfg.T * cfg.delta_f
    if abs(product - 1.0) > _REL_TOL:
        raise ConfigError(f"T * delta_f = {product:.12g} != 1 (critical sampling required)")
    if cfg.cp_len >= cfg.M * cfg.oversampling:
        raise ConfigError(
            f"cp_len = {cfg.cp_len} must be smaller than M * Q = {cfg.M * cfg.oversampling}"
        )
    if cfg.carrier_freq < 0:
        raise ConfigError("carrier_freq must be non-negative")
    return cfg


def make_config(M: int, N: int, delta_f: float = 15e3, **kwargs) -> OtfsConfig:
    """Build a validated config; ``T`` defaults to ``1 / delta_f``."""
    kwargs.setdefault("T", 1.0 / delta_f)
    return validate(OtfsConfig(M=M, N=N, delta_f=delta_f, **kwargs))


def config_from_dict(data: dict) -> OtfsConfig:
    fields = {f.name for f in dataclasses.fields(OtfsConfig)}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"M", "N", "delta_f", "T"} - set(data)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    return validate(OtfsConfig(**data))


def load_config(path: str | Path) -> OtfsConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def max_doppler(carrier_freq: float, speed: float, c: float = C_APPROX) -> float:
    """Maximum Doppler shift ``f_c * v / c`` in Hz.

    ``c`` defaults to 3e8 m/s; pass :data:`C_EXACT` for the exact value.
    """
    if speed < 0:
        raise ValueError("speed must be non-negative")
    return carrier_freq * speed / c


def kmh_to_ms(speed_kmh: float) -> float:
    return speed_kmh / 3.6


def coherence_time(nu_max: float) -> float:
    """Rule-of-thumb coherence time ``1 / (4 nu_max)`` in s."""
    if not nu_max > 0 or not math.isfinite(nu_max):
        raise ValueError(f"nu_max must be positive and finite, got {nu_max!r}")
    return 1.0 / (4.0 * nu_max)
