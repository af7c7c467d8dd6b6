"""TX/RX pulse shapes with their discrete forms and cross-ambiguity.

All pulses have causal support ``[0, T)`` and unit energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import OtfsConfig
from .transforms import dzt

# node count used by the trapezoid rule over one pulse overlap
QUAD_POINTS = 2**18 + 1


@dataclass(frozen=True)
class Pulse:
    """Unit-energy pulse on ``[0, duration)``.

    ``kind`` is ``"rect"`` or ``"rc"``; the latter is a rectangle whose edges
    are tapered by raised-cosine ramps, with roll-off ``beta`` in [0, 1]
    (``beta = 0`` is the rectangle). ``scale`` multiplies the shape and is
    only used to build degenerate pulses such as the all-zero one.
    """

    kind: str = "rect"
    duration: float = 1.0
    beta: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("rect", "rc"):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"roll-off must lie in [0, 1], got {self.beta}")
        if self.kind == "rect" and self.beta != 0.0:
            raise ValueError("rectangular pulse has no roll-off")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    @property
    def is_rect(self) -> bool:
        return self.kind == "rect" or self.beta == 0.0

    @property
    def amplitude(self) -> float:
        # closed-form energy of the tapered rectangle is A^2 T (1 - 5 beta / 8)
        return self.scale / math.sqrt(self.duration * (1.0 - 5.0 * self.beta / 8.0))

    def shape(self, t) -> np.ndarray:
        """Pulse value on the closed interval ``[0, duration]``, 0 outside."""
        t = np.asarray(t, dtype=float)
        T = self.duration
        inside = (t >= 0) & (t <= T)
        out = np.where(inside, self.amplitude, 0.0)
        if self.kind == "rc" and self.beta > 0:
            ramp = self.beta * T / 2
            edge = np.minimum(t, T - t)
            taper = 0.5 * (1.0 - np.cos(np.pi * np.clip(edge, 0.0, ramp) / ramp))
            out = np.where(inside & (edge < ramp), out * taper, out)
        return out

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(t < self.duration, self.shape(t), 0.0)

    def energy(self, points: int = QUAD_POINTS) -> float:
        t = np.linspace(0.0, self.duration, points)
        return float(np.trapezoid(np.abs(self.shape(t)) ** 2, t))


def rect(T: float) -> Pulse:
    return Pulse("rect", T)


def parse_pulse(text: str, T: float) -> Pulse:
    """Pulse from a config string: ``"rect"`` or ``"rc:<beta>"``."""
    text = text.strip()
    if text == "rect":
        return Pulse("rect", T)
    if text.startswith("rc:"):
        try:
            beta = float(text[3:])
        except ValueError:
            raise ValueError(f"bad roll-off in pulse spec {text!r}") from None
        return Pulse("rc", T, beta)
    raise ValueError(f"unknown pulse spec {text!r}; expected 'rect' or 'rc:<beta>'")


def pulse_to_str(g: Pulse) -> str:
    return "rect" if g.kind == "rect" else f"rc:{g.beta:g}"


def sample_pulse(g: Pulse, cfg: OtfsConfig, Q: int | None = None) -> np.ndarray:
    """Samples ``g(p T / (MQ))`` for ``p = 0 .. MQ-1``.

    The samples are rescaled so that ``sum |g_p|^2 / (M Q delta_f) == 1``.
    """
    Q = cfg.oversampling if Q is None else Q
    if Q < 1:
        raise ValueError("Q must be >= 1")
    n = cfg.M * Q
    samples = g(np.arange(n) * (cfg.T / n)).astype(complex)
    energy = np.sum(np.abs(samples) ** 2) / (n * cfg.delta_f)
    if energy > 0:
        samples /= math.sqrt(energy)
    return samples


def pulse_dzt(g: Pulse, cfg: OtfsConfig) -> np.ndarray:
    """DZT of the MN-periodic extension of ``g`` sampled at rate ``M / T``.

    Samples carry the ``sqrt(T / M)`` factor of the discrete amplitude
    convention, so a unit-energy rectangle maps to ``1 / sqrt(MN)`` everywhere.
    """
    M, N = cfg.M, cfg.N
    samples = np.zeros(M * N, dtype=complex)
    samples[:M] = sample_pulse(g, cfg, Q=1) * math.sqrt(cfg.T / M)
    return dzt(samples, M, N)


def _rect_overlap(T: float, tau: float) -> tuple[float, float]:
    return max(0.0, tau), min(T, T + tau)


def ambiguity_rect(T: float, tau: float, nu: float) -> complex:
    """Closed form of the rect/rect cross-ambiguity function."""
    a, b = _rect_overlap(T, tau)
    if b <= a:
        return 0j
    width = b - a
    # int_a^b exp(-j2pi nu (t - tau)) dt / T
    return complex(width / T * np.sinc(nu * width) * np.exp(-1j * np.pi * nu * (a + b - 2 * tau)))


def ambiguity(
    g_tx: Pulse,
    g_rx: Pulse,
    tau: float,
    nu: float,
    *,
    method: str = "auto",
    points: int = QUAD_POINTS,
) -> complex:
    """``A(tau, nu) = int g_tx(t) conj(g_rx(t - tau)) exp(-j2pi nu (t - tau)) dt``.

    ``method="auto"`` uses the closed form when both pulses are unit-energy
    rectangles of the same duration and the composite trapezoid rule
    otherwise; ``"quad"`` forces quadrature.
    """
    if method not in ("auto", "closed", "quad"):
        raise ValueError(f"unknown method {method!r}")
    closed_ok = (
        g_tx.is_rect and g_rx.is_rect and g_tx.duration == g_rx.duration
        and g_tx.scale == 1.0 and g_rx.scale == 1.0
    )
    if method == "closed" and not closed_ok:
        raise ValueError("closed form only covers matched unit-energy rectangles")
    if method == "closed" or (method == "auto" and closed_ok):
        return ambiguity_rect(g_tx.duration, tau, nu)

    a = max(0.0, tau)
    b = min(g_tx.duration, g_rx.duration + tau)
    if b <= a:
        return 0j
    t = np.linspace(a, b, points)
    f = g_tx.shape(t) * np.conj(g_rx.shape(t - tau)) * np.exp(-2j * np.pi * nu * (t - tau))
    return complex(np.trapezoid(f, t))


def sampled_ambiguity(
    g_tx: Pulse, g_rx: Pulse, tau, nu, cfg: OtfsConfig
) -> np.ndarray:
    """Cross-ambiguity evaluated on the system sample grid.

    Rectangle rule with step ``T / (MQ)`` over the TX pulse samples, using the
    renormalized samples of :func:`sample_pulse`. This is the kernel that the
    sampled-time modems actually realize. ``tau`` and ``nu`` broadcast.
    """
    n = cfg.samples_per_slot
    ts = cfg.T / n
    p = np.arange(n)
    tx = sample_pulse(g_tx, cfg)
    tau = np.asarray(tau, dtype=float)[..., None]
    nu = np.asarray(nu, dtype=float)[..., None]
    shift = p - tau / ts
    rx = _on_grid(g_rx, shift, n, cfg.T) * _sample_norm(g_rx, cfg)
    return ts * np.sum(tx * np.conj(rx) * np.exp(-2j * np.pi * nu * shift * ts), axis=-1)


def _on_grid(g: Pulse, x: np.ndarray, n: int, T: float) -> np.ndarray:
    """``g`` at ``x`` sample periods; support is ``0 <= x < n`` after snapping
    near-integers so that on-grid shifts never straddle a support edge."""
    snapped = np.round(x)
    x = np.where(np.abs(x - snapped) < 1e-9, snapped, x)
    inside = (x >= 0) & (x < n)
    return np.where(inside, g.shape(np.clip(x, 0, n) * (T / n)), 0.0)


def _sample_norm(g: Pulse, cfg: OtfsConfig) -> float:
    n = cfg.samples_per_slot
    raw = g(np.arange(n) * (cfg.T / n))
    energy = np.sum(np.abs(raw) ** 2) / (n * cfg.delta_f)
    return 1.0 / math.sqrt(energy) if energy > 0 else 1.0
