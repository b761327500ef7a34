"""Command line: run sweeps to CSV, or fit scaling exponents from CSVs.

    disttrack --tracker hh --k 2,4,8 --eps 0.1 --n 100000 --out hh.csv
    disttrack fit a.csv b.csv c.csv

List-valued flags take comma-separated values and the runs cover their
product.  ``--config FILE`` reads ``key=value`` lines mirroring the flags;
flags given on the command line win.
"""
from __future__ import annotations

import argparse
import sys

from .experiments import expand, final_rows, fit_scaling, run_experiments

LIST_FLAGS = {
    "tracker": str, "k": int, "eps": float, "phi": float, "n": int,
    "dist": str, "mode": str, "placement": str, "seed": int,
}
DEFAULTS = {
    "tracker": "hh", "k": "2", "eps": "0.1", "phi": "0.5", "n": "10000",
    "dist": "uniform", "mode": "exact", "placement": "rr", "seed": "0",
}


def read_config(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in LIST_FLAGS and key not in ("checkpoint_every", "out", "u"):
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="disttrack", description=__doc__.splitlines()[0])
    for name in LIST_FLAGS:
        p.add_argument(f"--{name}", default=None)
    p.add_argument("--u", type=int, default=None, help="universe size (default 65536)")
    p.add_argument("--checkpoint-every", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--config", default=None, help="key=value file mirroring the flags")
    return p


def specs_from_args(args):
    conf = read_config(args.config) if args.config else {}
    grid = {}
    for name, conv in LIST_FLAGS.items():
        raw = getattr(args, name)
        if raw is None:
            raw = conf.get(name, DEFAULTS[name])
        values = [v.strip() for v in str(raw).split(",") if v.strip()]
        grid[name] = [conv(v) for v in values]
    u = args.u if args.u is not None else int(conf.get("u", 1 << 16))
    grid["u"] = [u]
    every = args.checkpoint_every
    if every is None and "checkpoint_every" in conf:
        every = int(conf["checkpoint_every"])
    grid["checkpoint_every"] = [every]
    out = args.out if args.out is not None else conf.get("out")
    return list(expand(grid)), out


def main_fit(argv):
    p = argparse.ArgumentParser(prog="disttrack fit")
    p.add_argument("csv", nargs="+")
    args = p.parse_args(argv)
    try:
        fit = fit_scaling(final_rows(args.csv))
    except ValueError as e:
        print(f"disttrack fit: {e}", file=sys.stderr)
        return 2
    print(f"parameter={fit.parameter} exponent={fit.exponent:.4f} "
          f"residual={fit.residual:.4g} points={fit.points}")
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] == "fit":
        return main_fit(argv[1:])
    args = build_parser().parse_args(argv)
    try:
        specs, out = specs_from_args(args)
        violations = run_experiments(specs, out if out is not None else sys.stdout)
    except ValueError as e:
        print(f"disttrack: {e}", file=sys.stderr)
        return 2
    if violations:
        print(f"disttrack: {violations} violation(s)", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
