"""Acceptance checks shared by ``otfs selftest`` and the test suite.

Each check returns a list of :class:`~otfs.experiments.Verdict` carrying
the measured value and its threshold.
"""

from __future__ import annotations

import time
from collections.abc import Callable

import numpy as np

from .channel import from_taps
from .config import make_config
from .detection import SymbolMap, demap_symbols, map_bits, mmse_equalize
from .effective import (
    build_analytic, closed_form_io, closed_form_operator, max_abs, probe_operator,
    relative_frobenius,
)
from .experiments import ExperimentSpec, Verdict, at_most, run
from .modems import ofdm_demodulate, ofdm_modulate, run_chain, sfft_demodulate, sfft_modulate
from .pulses import ambiguity, ambiguity_rect, rect
from .transforms import dzt, idzt, isfft, sfft

EQUIVALENCE_SIZES = ((8, 4), (16, 8), (32, 16))
SEED = 20240611


def three_path(cfg):
    """Fixed on-grid three-path channel used by the structural checks."""
    return from_taps(
        [(0.8 + 0.2j, 0, 0), (-0.3 + 0.45j, 1, 1), (0.25 - 0.3j, 3, -1)], cfg
    )


def _qpsk(rng, shape):
    return map_bits(rng.integers(0, 2, size=2 * shape[0] * shape[1]), SymbolMap("qpsk"), shape)


def _timed(name: str, limit: float, fn: Callable[[], list[Verdict]]) -> list[Verdict]:
    start = time.perf_counter()
    verdicts = fn()
    elapsed = time.perf_counter() - start
    return verdicts + [at_most(f"{name} runtime [s]", elapsed, limit)]


def architecture_equivalence() -> list[Verdict]:
    def body():
        rng = np.random.default_rng(SEED)
        worst = 0.0
        for M, N in EQUIVALENCE_SIZES:
            cfg = make_config(M, N, cp_len=3)
            ch = three_path(cfg)
            for _ in range(5):
                x = _qpsk(rng, cfg.shape)
                worst = max(worst, max_abs(run_chain("sfft", x, cfg, ch), run_chain("dzt", x, cfg, ch)))
        return [at_most("1 SFFT vs DZT chain max-abs", worst, 1e-9)]

    return _timed("1 equivalence", 5.0, body)


def closed_form_fidelity() -> list[Verdict]:
    def body():
        worst = 0.0
        for M, N in EQUIVALENCE_SIZES:
            cfg = make_config(M, N, cp_len=3)
            ch = three_path(cfg)
            for trial in range(20):
                x = _qpsk(np.random.default_rng([SEED, M, N, trial]), cfg.shape)
                y = closed_form_io(x, ch, cfg)
                worst = max(
                    worst,
                    max_abs(y, run_chain("sfft", x, cfg, ch)),
                    max_abs(y, run_chain("dzt", x, cfg, ch)),
                )
        return [at_most("2 closed form vs simulated chains max-abs", worst, 1e-9)]

    return _timed("2 closed form", 10.0, body)


def analytic_triangulation() -> list[Verdict]:
    def body():
        cfg = make_config(8, 4, cp_len=2)
        out = []
        for label, taps in (("integer", [(1.0, 1, 1)]), ("fractional k=0.5", [(1.0, 1, 0.5)])):
            ch = from_taps(taps, cfg)
            analytic = build_analytic(ch, cfg)
            for arch in ("sfft", "dzt"):
                err = relative_frobenius(analytic, probe_operator(arch, ch, cfg))
                out.append(at_most(f"3 analytic vs probed ({label}, {arch}) rel. Frobenius", err, 1e-6))
        return out

    return _timed("3 triangulation", 60.0, body)


def ofdm_degeneracy() -> list[Verdict]:
    out = []
    rng = np.random.default_rng(SEED)
    for M in (16, 64):
        cfg = make_config(M, 1, cp_len=M // 4)
        x = _qpsk(rng, cfg.shape)
        s = sfft_modulate(x, None, cfg)
        x_freq = np.fft.fft(x[:, 0]) / np.sqrt(M)
        ref = ofdm_modulate(x_freq, cfg.cp_len)
        y = sfft_demodulate(s, None, cfg)[:, 0]
        y_ref = np.fft.ifft(ofdm_demodulate(ref, M, cfg.cp_len)[:, 0]) * np.sqrt(M)
        err = max(max_abs(s.samples, ref), max_abs(y, y_ref))
        out.append(at_most(f"4 SFFT chain vs OFDM reference (M={M}) max-abs", err, 1e-12))
    return out


def transform_unitarity() -> list[Verdict]:
    rng = np.random.default_rng(SEED)
    worst_rt = worst_energy = 0.0
    for M in (1, 2, 4, 8, 16, 32, 64):
        for N in (1, 2, 4, 8, 16, 32):
            x = rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))
            norm = np.linalg.norm(x)
            fwd = isfft(x)
            worst_rt = max(worst_rt, max_abs(sfft(fwd), x), max_abs(isfft(sfft(x)), x))
            worst_energy = max(worst_energy, abs(np.linalg.norm(fwd) - norm) / norm)
            seq = idzt(x, M, N)
            worst_rt = max(worst_rt, max_abs(dzt(seq, M, N), x), max_abs(idzt(dzt(seq, M, N), M, N), seq))
            worst_energy = max(worst_energy, abs(np.linalg.norm(seq) - norm) / norm)
    return [
        at_most("5 transform round-trip max-abs", worst_rt, 1e-12),
        at_most("5 transform energy relative error", worst_energy, 1e-12),
    ]


def doppler_numerics() -> list[Verdict]:
    spec = ExperimentSpec(
        "doppler-example", make_config(12, 14), seed=0,
        options={"carrier_freq": 3.5e9, "speed_kmh": 300.0, "c": 3e8},
    )
    m = run(spec).metrics
    return [
        at_most("6 |nu_max - 972.22 Hz|", abs(m["nu_max"] - 972.22), 0.01),
        at_most("6 |coherence time - 2.5714e-4 s|", abs(m["coherence_time"] - 2.5714e-4), 1e-7),
    ]


def unitary_channel() -> list[Verdict]:
    cfg = make_config(16, 8, cp_len=2)
    ch = from_taps([(np.exp(0.7j), 2, 0.37)], cfg)
    rng = np.random.default_rng(SEED)
    out = []
    for arch in ("sfft", "dzt"):
        H = probe_operator(arch, ch, cfg).matrix
        x = rng.standard_normal((50, H.shape[0])) + 1j * rng.standard_normal((50, H.shape[0]))
        ratio = np.linalg.norm(x @ H.T, axis=1) / np.linalg.norm(x, axis=1)
        out.append(at_most(f"7 max | ||Hx||/||x|| - 1 | ({arch})", np.max(np.abs(ratio - 1)), 1e-9))
    return out


def noiseless_recovery() -> list[Verdict]:
    cfg = make_config(16, 8, cp_len=3)
    ch = three_path(cfg)
    H = closed_form_operator(ch, cfg)
    smap = SymbolMap("qpsk")
    rng = np.random.default_rng(SEED)
    errors = 0
    for _ in range(100):
        bits = rng.integers(0, 2, size=2 * cfg.M * cfg.N)
        y = run_chain("sfft", map_bits(bits, smap, cfg.shape), cfg, ch)
        x_hat = mmse_equalize(y, H, 1e-12)
        wrong = demap_symbols(x_hat, smap).reshape(-1, 2) != bits.reshape(-1, 2)
        errors += int(np.count_nonzero(wrong.any(axis=1)))
    return [at_most("8 MMSE symbol errors over 100 frames", errors, 0)]


def awgn_sanity() -> list[Verdict]:
    def body():
        spec = ExperimentSpec(
            "ber-sweep", make_config(16, 8), seed=SEED, snr_grid=[4.0], trials=400,
            options={"arch": "sfft", "constellation": "qpsk"},
        )
        res = run(spec)
        row = res.curves["ber"][0]
        v = res.verdicts[0]
        return [
            Verdict("9 bits simulated", row["bits"], 1e5, row["bits"] >= 1e5, ">="),
            Verdict("9 |BER - Q(sqrt(2 Eb/N0))| in binomial sigmas", v.measured, v.threshold, v.passed),
        ]

    return _timed("9 AWGN", 30.0, body)


def ambiguity_check() -> list[Verdict]:
    T = 1 / 15e3
    g = rect(T)
    taus = np.linspace(-T, T, 33)
    err = max(
        abs(ambiguity(g, g, tau, 0.0, method="quad") - (T - abs(tau)) / T) for tau in taus
    )
    err = max(err, max(abs(ambiguity_rect(T, tau, 0.0) - (T - abs(tau)) / T) for tau in taus))
    return [
        at_most("10 quadrature vs (T-|tau|)/T max-abs", err, 1e-9),
        at_most("10 |A(0,0) - 1|", abs(ambiguity(g, g, 0.0, 0.0) - 1), 1e-12),
    ]


CRITERIA: dict[int, Callable[[], list[Verdict]]] = {
    1: architecture_equivalence,
    2: closed_form_fidelity,
    3: analytic_triangulation,
    4: ofdm_degeneracy,
    5: transform_unitarity,
    6: doppler_numerics,
    7: unitary_channel,
    8: noiseless_recovery,
    9: awgn_sanity,
    10: ambiguity_check,
}


def run_all(echo: Callable[[str], None] | None = print) -> list[Verdict]:
    verdicts = []
    for number, check in CRITERIA.items():
        for v in check():
            verdicts.append(v)
            if echo:
                echo(v.line())
    return verdicts
