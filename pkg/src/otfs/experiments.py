"""Seeded experiment runner and result emission."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    ChannelSpec, add_awgn, apply_channel, channel_from_dict, default_cp_len, normalize, preset,
)
from .config import (
    C_APPROX, OtfsConfig, coherence_time, config_from_dict, kmh_to_ms, max_doppler,
)
from .detection import (
    SymbolMap, ber_count, demap_symbols, map_bits, mmse_equalize, noise_variance_for_ebn0, qfunc,
)
from .effective import (
    ANALYTIC_BUDGET, build_analytic, closed_form_io, closed_form_operator, max_abs,
    probe_operator, relative_frobenius,
)
from .modems import (
    demodulate, modulate, ofdm_demodulate, ofdm_modulate, run_chain, sfft_demodulate,
    sfft_modulate,
)
from .pulses import parse_pulse

KINDS = ("loopback", "equivalence", "effch-compare", "ofdm-degenerate", "ber-sweep", "doppler-example")
DETECTION_BUDGET = 1024

SNR_DEFINITION = (
    "Eb/N0 per DD-grid symbol with unit average symbol energy; "
    "N0 = 1 / (bits_per_symbol * 10^(EbN0_dB / 10)); "
    "time-domain noise variance per sample = Q * N0"
)


class ExperimentError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    kind: str
    config: OtfsConfig
    seed: int
    channel: ChannelSpec | str | None = None
    snr_grid: list[float] = field(default_factory=list)
    trials: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ExperimentError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.seed is None or isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ExperimentError("an integer seed is mandatory")
        if self.kind == "ber-sweep" and not self.snr_grid:
            raise ExperimentError("ber-sweep needs a non-empty snr_grid")
        if self.trials < 1:
            raise ExperimentError(f"empty experiment: trials = {self.trials}")

    def resolved_channel(self) -> ChannelSpec | None:
        if isinstance(self.channel, str):
            return preset(self.channel, self.config)
        return self.channel

    def to_dict(self) -> dict:
        ch = self.channel
        return {
            "kind": self.kind,
            "config": self.config.to_dict(),
            "seed": self.seed,
            "channel": ch if isinstance(ch, str) or ch is None else ch.to_dict(),
            "snr_grid": list(self.snr_grid),
            "trials": self.trials,
            "options": dict(self.options),
        }


def spec_from_dict(data: dict) -> ExperimentSpec:
    known = {"kind", "config", "seed", "channel", "snr_grid", "trials", "options"}
    unknown = set(data) - known
    if unknown:
        raise ExperimentError(f"unknown spec keys: {sorted(unknown)}")
    if "kind" not in data or "config" not in data:
        raise ExperimentError("spec needs 'kind' and 'config'")
    ch = data.get("channel")
    if isinstance(ch, dict):
        ch = channel_from_dict(ch)
    return ExperimentSpec(
        kind=data["kind"],
        config=config_from_dict(data["config"]),
        seed=data.get("seed"),
        channel=ch,
        snr_grid=[float(v) for v in data.get("snr_grid", [])],
        trials=int(data.get("trials", 1)),
        options=dict(data.get("options", {})),
    )


def load_spec(path: str | Path, env: dict | None = None) -> ExperimentSpec:
    """Read a JSON spec; ``OTFS_SEED`` in ``env`` overrides its seed."""
    env = os.environ if env is None else env
    with open(path) as fh:
        data = json.load(fh)
    if env.get("OTFS_SEED"):
        data["seed"] = int(env["OTFS_SEED"])
    return spec_from_dict(data)


@dataclass
class Verdict:
    name: str
    measured: float
    threshold: float
    passed: bool
    comparison: str = "<="

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: measured {self.measured:.6g} {self.comparison} {self.threshold:.6g}"

    def to_dict(self) -> dict:
        return {
            "name": self.name, "measured": self.measured, "threshold": self.threshold,
            "comparison": self.comparison, "status": "PASS" if self.passed else "FAIL",
        }


def at_most(name: str, measured: float, threshold: float) -> Verdict:
    return Verdict(name, float(measured), float(threshold), bool(measured <= threshold))


@dataclass
class ResultBundle:
    kind: str
    metrics: dict
    verdicts: list[Verdict]
    curves: dict[str, list[dict]]
    provenance: dict

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "status": "PASS" if self.passed else "FAIL",
            "metrics": self.metrics,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "curves": sorted(self.curves),
            "provenance": self.provenance,
        }


def _qpsk_grid(rng, shape) -> np.ndarray:
    smap = SymbolMap("qpsk")
    bits = rng.integers(0, 2, size=shape[0] * shape[1] * 2)
    return map_bits(bits, smap, shape)


def _with_cp_for(cfg: OtfsConfig, ch: ChannelSpec | None, options: dict) -> OtfsConfig:
    if "cp_len" in options:
        return cfg.replace(cp_len=int(options["cp_len"]))
    if ch is not None and cfg.cp_len == 0:
        return cfg.replace(cp_len=default_cp_len(ch, cfg))
    return cfg


def _pulses(cfg: OtfsConfig, options: dict):
    g_tx = parse_pulse(options.get("pulse_tx", options.get("pulse", "rect")), cfg.T)
    g_rx = parse_pulse(options.get("pulse_rx", options.get("pulse", "rect")), cfg.T)
    return g_tx, g_rx


def _run_loopback(spec: ExperimentSpec, rng) -> tuple[dict, list, dict]:
    cfg = spec.config
    g_tx, g_rx = _pulses(cfg, spec.options)
    archs = spec.options.get("archs", ["sfft", "dzt"])
    metrics, verdicts = {}, []
    worst = 0.0
    for arch in archs:
        err = 0.0
        for _ in range(spec.trials):
            x = _qpsk_grid(rng, cfg.shape)
            err = max(err, max_abs(run_chain(arch, x, cfg, None, g_tx, g_rx), x))
        metrics[f"max_abs_error_{arch}"] = err
        worst = max(worst, err)
        verdicts.append(at_most(f"{arch} loopback max-abs error", err, 1e-10))
    metrics["max_abs_error"] = worst
    return metrics, verdicts, {}


def _require_channel(spec: ExperimentSpec) -> ChannelSpec:
    ch = spec.resolved_channel()
    if ch is None:
        raise ExperimentError(f"{spec.kind} needs a channel")
    return ch


def _run_equivalence(spec: ExperimentSpec, rng) -> tuple[dict, list, dict]:
    ch = _require_channel(spec)
    cfg = _with_cp_for(spec.config, ch, spec.options)
    if cfg.oversampling != 1:
        raise ExperimentError("equivalence runs at Q = 1")
    if not all(p.is_integer for p in normalize(ch, cfg)):
        raise ExperimentError("equivalence needs on-grid (integer) paths")
    eq_err = cf_err = 0.0
    for _ in range(spec.trials):
        x = _qpsk_grid(rng, cfg.shape)
        y_sfft = run_chain("sfft", x, cfg, ch)
        y_dzt = run_chain("dzt", x, cfg, ch)
        y_cf = closed_form_io(x, ch, cfg)
        eq_err = max(eq_err, max_abs(y_sfft, y_dzt))
        cf_err = max(cf_err, max_abs(y_sfft, y_cf), max_abs(y_dzt, y_cf))
    metrics = {"max_abs_sfft_vs_dzt": eq_err, "max_abs_closed_form_vs_chains": cf_err, "cp_len": cfg.cp_len}
    verdicts = [
        at_most("SFFT vs DZT max-abs", eq_err, 1e-9),
        at_most("closed form vs chains max-abs", cf_err, 1e-9),
    ]
    return metrics, verdicts, {}


def _run_effch_compare(spec: ExperimentSpec, rng) -> tuple[dict, list, dict]:
    ch = _require_channel(spec)
    cfg = _with_cp_for(spec.config, ch, spec.options)
    M, N = cfg.shape
    if M * N > ANALYTIC_BUDGET:
        raise ExperimentError(f"budget exceeded: M*N = {M * N} > {ANALYTIC_BUDGET}")
    g_tx, g_rx = _pulses(cfg, spec.options)
    kernel = spec.options.get("kernel", "sampled")
    analytic = build_analytic(ch, cfg, g_tx, g_rx, kernel=kernel)
    metrics, verdicts = {"kernel": kernel}, []
    archs = ["sfft", "dzt"] if g_tx.is_rect and g_rx.is_rect else ["sfft"]
    for arch in archs:
        probed = probe_operator(arch, ch, cfg, g_tx, g_rx)
        err = relative_frobenius(analytic, probed)
        metrics[f"rel_fro_analytic_vs_probe_{arch}"] = err
        verdicts.append(at_most(f"analytic vs probed ({arch}) relative Frobenius", err, 1e-6))
    if g_tx.is_rect and g_rx.is_rect and all(p.is_integer for p in normalize(ch, cfg)):
        closed = closed_form_operator(ch, cfg)
        err = relative_frobenius(analytic, closed)
        metrics["rel_fro_analytic_vs_closed_form"] = err
        verdicts.append(at_most("analytic vs closed form relative Frobenius", err, 1e-6))
    return metrics, verdicts, {}


def _run_ofdm_degenerate(spec: ExperimentSpec, rng) -> tuple[dict, list, dict]:
    cfg = spec.config
    if cfg.N != 1:
        cfg = cfg.replace(N=1)
    M, cp = cfg.M, cfg.cp_len
    tx_err = rx_err = 0.0
    for _ in range(spec.trials):
        x = _qpsk_grid(rng, cfg.shape)
        s = sfft_modulate(x, None, cfg)
        # the ISFFT at N = 1 is a unitary DFT down the delay column
        x_freq = np.fft.fft(x[:, 0]) / np.sqrt(M)
        ref = ofdm_modulate(x_freq, cp)
        tx_err = max(tx_err, max_abs(s.samples, ref))
        y = sfft_demodulate(s, None, cfg)
        y_ref = np.fft.ifft(ofdm_demodulate(ref, M, cp)[:, 0]) * np.sqrt(M)
        rx_err = max(rx_err, max_abs(y[:, 0], y_ref))
    metrics = {"max_abs_tx": tx_err, "max_abs_rx": rx_err}
    verdicts = [
        at_most("SFFT TX vs OFDM TX max-abs", tx_err, 1e-12),
        at_most("SFFT RX vs OFDM RX max-abs", rx_err, 1e-12),
    ]
    return metrics, verdicts, {}


def _run_ber_sweep(spec: ExperimentSpec, rng) -> tuple[dict, list, dict]:
    ch = spec.resolved_channel()
    cfg = _with_cp_for(spec.config, ch, spec.options)
    M, N = cfg.shape
    if M * N > DETECTION_BUDGET:
        raise ExperimentError(f"budget exceeded: M*N = {M * N} > {DETECTION_BUDGET}")
    arch = spec.options.get("arch", "sfft")
    smap = SymbolMap(spec.options.get("constellation", "qpsk"))
    g_tx, g_rx = _pulses(cfg, spec.options)
    H = probe_operator(arch, ch, cfg, g_tx, g_rx) if ch is not None else None

    rows = []
    for snr_db in spec.snr_grid:
        n0 = noise_variance_for_ebn0(snr_db, smap)
        errors = bits_total = 0
        for _ in range(spec.trials):
            bits = rng.integers(0, 2, size=M * N * smap.bits_per_symbol)
            x = map_bits(bits, smap, cfg.shape)
            s = modulate(arch, x, g_tx, cfg)
            r = apply_channel(s, ch, cfg) if ch is not None else s
            r = add_awgn(r, cfg.oversampling * n0, rng)
            y = demodulate(arch, r, g_rx, cfg)
            x_hat = mmse_equalize(y, H, n0) if H is not None else y
            e, t, _ = ber_count(bits, demap_symbols(x_hat, smap))
            errors += e
            bits_total += t
        rows.append({"snr_db": snr_db, "ber": errors / bits_total, "errors": errors, "bits": bits_total})
    metrics = {"snr_definition": SNR_DEFINITION, "arch": arch, "constellation": smap.constellation}
    verdicts = []
    if ch is None and smap.constellation in ("bpsk", "qpsk"):
        # Gray QPSK and BPSK share the per-bit AWGN error probability
        for row in rows:
            p = float(qfunc(math.sqrt(2 * 10 ** (row["snr_db"] / 10))))
            sigma = math.sqrt(p * (1 - p) / row["bits"])
            verdicts.append(
                at_most(f"|BER - Q(sqrt(2 Eb/N0))| / sigma at {row['snr_db']:g} dB",
                        abs(row["ber"] - p) / sigma, 3.0)
            )
    return metrics, verdicts, {"ber": rows}


def _run_doppler_example(spec: ExperimentSpec, rng) -> tuple[dict, list, dict]:
    opts = spec.options
    fc = float(opts.get("carrier_freq", spec.config.carrier_freq or 3.5e9))
    speed = kmh_to_ms(float(opts.get("speed_kmh", 300.0)))
    c = float(opts.get("c", C_APPROX))
    nu = max_doppler(fc, speed, c)
    tc = coherence_time(nu)
    cp_fraction = float(opts.get("cp_fraction", 0.2))
    symbol = (1 + cp_fraction) / spec.config.delta_f
    metrics = {
        "carrier_freq": fc, "speed_ms": speed, "c": c, "nu_max": nu, "coherence_time": tc,
        "ofdm_symbol_with_cp": symbol, "symbols_per_coherence_time": math.floor(tc / symbol),
    }
    verdicts = []
    if "expected_nu_max" in opts:
        verdicts.append(at_most("|nu_max - expected|", abs(nu - float(opts["expected_nu_max"])), 0.01))
    if "expected_coherence_time" in opts:
        verdicts.append(
            at_most("|coherence time - expected|", abs(tc - float(opts["expected_coherence_time"])), 1e-7)
        )
    return metrics, verdicts, {}


_RUNNERS = {
    "loopback": _run_loopback,
    "equivalence": _run_equivalence,
    "effch-compare": _run_effch_compare,
    "ofdm-degenerate": _run_ofdm_degenerate,
    "ber-sweep": _run_ber_sweep,
    "doppler-example": _run_doppler_example,
}


def run(spec: ExperimentSpec) -> ResultBundle:
    rng = np.random.default_rng(spec.seed)
    metrics, verdicts, curves = _RUNNERS[spec.kind](spec, rng)
    provenance = {
        "spec": spec.to_dict(),
        "seed": spec.seed,
        "library_version": __version__,
    }
    return ResultBundle(spec.kind, metrics, verdicts, curves, provenance)


CSV_COLUMNS = ("snr_db", "ber", "errors", "bits")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def emit(results: ResultBundle, path: str | Path) -> list[Path]:
    """Write ``summary.json`` and one CSV per curve into directory ``path``."""
    out = Path(path)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary = out / "summary.json"
        summary.write_text(
            json.dumps(results.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n"
        )
        written.append(summary)
        for name, rows in sorted(results.curves.items()):
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(row[k]) if isinstance(row[k], float) else row[k] for k in CSV_COLUMNS})
            target = out / f"{name}.csv"
            target.write_text(buf.getvalue())
            written.append(target)
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc
    return written

