"""Command-line entry point: ``otfs run | modem | effch | selftest``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .acceptance import run_all
from .channel import TDSequence, apply_channel, default_cp_len, from_taps, load_channel, preset
from .config import make_config
from .detection import SymbolMap, map_bits, mmse_equalize
from .effective import build_analytic, closed_form_operator, probe_operator, relative_frobenius
from .experiments import emit, load_spec, run
from .gridio import write_grid
from .modems import demodulate, modulate, ofdm_demodulate, ofdm_modulate
from .pulses import parse_pulse


def _seed(args) -> int:
    env = os.environ.get("OTFS_SEED")
    return int(env) if env else args.seed


def _channel(args, cfg):
    if args.channel is None:
        return None
    if args.channel == "identity":
        return from_taps([(1.0, 0, 0)], cfg)
    if Path(args.channel).is_file():
        return load_channel(args.channel)
    return preset(args.channel, cfg)


def _frame_config(args):
    cfg = make_config(args.m, args.n, delta_f=args.delta_f, oversampling=args.q)
    ch = _channel(args, cfg)
    cp = args.cp if args.cp is not None else (default_cp_len(ch, cfg) if ch is not None else 0)
    return cfg.replace(cp_len=cp), ch


def cmd_run(args) -> int:
    spec = load_spec(args.spec)
    result = run(spec)
    for v in result.verdicts:
        print(v.line())
    if args.out:
        for path in emit(result, args.out):
            print(f"wrote {path}")
    else:
        print(json.dumps(result.metrics, indent=2, sort_keys=True, default=str))
    return 0 if result.passed else 1


def cmd_modem(args) -> int:
    cfg, ch = _frame_config(args)
    rng = np.random.default_rng(_seed(args))
    smap = SymbolMap("qpsk")
    bits = rng.integers(0, 2, size=2 * cfg.M * cfg.N)
    x = map_bits(bits, smap, cfg.shape)
    g = parse_pulse(args.pulse, cfg.T)
    if args.arch == "ofdm":
        if cfg.oversampling != 1:
            raise SystemExit("the OFDM reference runs at Q = 1")
        samples = ofdm_modulate(x, cfg.cp_len)
        if ch is not None:
            seq = TDSequence(samples, cfg.sample_rate, cfg.cp_len, cfg.M)
            samples = apply_channel(seq, ch, cfg).samples
        y = ofdm_demodulate(samples, cfg.M, cfg.cp_len)
    else:
        s = modulate(args.arch, x, g, cfg)
        r = apply_channel(s, ch, cfg) if ch is not None else s
        y = demodulate(args.arch, r, g, cfg)
    summary = {
        "arch": args.arch, "M": cfg.M, "N": cfg.N, "Q": cfg.oversampling, "cp_len": cfg.cp_len,
        "pulse": args.pulse, "channel": args.channel,
        "max_abs_error": float(np.max(np.abs(y - x))),
    }
    if ch is not None and args.arch != "ofdm":
        x_hat = mmse_equalize(y, probe_operator(args.arch, ch, cfg, g, g), 1e-12)
        summary["max_abs_error_after_mmse"] = float(np.max(np.abs(x_hat - x)))
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.dump:
        write_grid(args.dump, y)
    return 0


def cmd_effch(args) -> int:
    cfg, ch = _frame_config(args)
    if ch is None:
        ch = from_taps([(1.0, 0, 0)], cfg)
    g = parse_pulse(args.pulse, cfg.T)
    if args.method == "analytic":
        H = build_analytic(ch, cfg, g, g, kernel=args.kernel)
    elif args.method == "closed":
        H = closed_form_operator(ch, cfg)
    else:
        H = probe_operator(args.method.split("-")[1], ch, cfg, g, g)
    meta = {
        "M": cfg.M, "N": cfg.N, "Q": cfg.oversampling, "cp_len": cfg.cp_len,
        "channel": ch.to_dict(), "filter": args.pulse, "method": args.method,
        "library_version": __version__,
    }
    if args.method == "analytic":
        meta["kernel"] = args.kernel
    if args.compare:
        probed = probe_operator("sfft", ch, cfg, g, g)
        meta["max_rel_frobenius_vs_probe"] = relative_frobenius(H, probed)
    out = Path(args.out)
    write_grid(out, H.matrix)
    sidecar = out.with_suffix(out.suffix + ".json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} and {sidecar}")
    return 0


def cmd_selftest(args) -> int:
    verdicts = run_all(print)
    failed = sum(not v.passed for v in verdicts)
    print(f"{len(verdicts) - failed}/{len(verdicts)} checks passed")
    return 0 if failed == 0 else 1


def _add_frame_args(p):
    p.add_argument("--m", type=int, default=16, help="delay bins / subcarriers")
    p.add_argument("--n", type=int, default=8, help="Doppler bins / slots")
    p.add_argument("--q", type=int, default=1, help="oversampling factor")
    p.add_argument("--cp", type=int, default=None, help="CP length in samples (default: channel delay spread)")
    p.add_argument("--delta-f", type=float, default=15e3)
    p.add_argument("--pulse", default="rect", help="'rect' or 'rc:<beta>'")
    p.add_argument("--channel", default=None, help="preset name or channel JSON file ('identity' for a clean path)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otfs", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment spec")
    p.add_argument("spec")
    p.add_argument("--out", help="directory for summary.json and curve CSVs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("modem", help="one random QPSK frame through a transceiver")
    p.add_argument("--arch", choices=("sfft", "dzt", "ofdm"), default="sfft")
    _add_frame_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump", help="write the received DD grid in binary grid format")
    p.set_defaults(func=cmd_modem)

    p = sub.add_parser("effch", help="dump an effective DD channel operator")
    _add_frame_args(p)
    p.add_argument("--method", choices=("analytic", "closed", "probe-sfft", "probe-dzt"), default="analytic")
    p.add_argument("--kernel", choices=("sampled", "continuous"), default="sampled")
    p.add_argument("--compare", action="store_true", help="report error against the probed operator")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_effch)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"otfs: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
