"""Parameter sweeps, CSV rows, and log-log scaling fits."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import TrackerConfig
from .simulator import SimulationRun, StreamSource, TRACKERS

CSV_COLUMNS = ["tracker", "k", "eps", "phi", "n_so_far", "messages", "words",
               "violations", "bound_messages"]


def bound_messages(tracker, k, eps, n_so_far):
    """Reference curve with unit constants and base-2 logarithms."""
    base = k / eps * math.log2(max(n_so_far, 1))
    if tracker == "allq":
        return base * math.log2(1 / eps) ** 2
    return base


@dataclass
class RunSpec:
    tracker: str
    k: int
    eps: float
    phi: float
    n: int
    dist: str = "uniform"
    mode: str = "exact"
    placement: str = "rr"
    seed: int = 0
    u: int = 1 << 16
    checkpoint_every: int | None = None
    invariants: bool = True

    def validate(self):
        if self.tracker not in TRACKERS:
            raise ValueError(f"tracker must be one of {sorted(TRACKERS)}, got {self.tracker!r}")
        cfg = TrackerConfig(k=self.k, eps=self.eps, phi=self.phi, u=self.u)
        if self.tracker == "hh":
            cfg.require_hh()
        if self.tracker == "allq":
            TRACKERS["allq"](cfg, self.mode)
        if self.mode not in ("exact", "sketch"):
            raise ValueError(f"mode must be exact or sketch, got {self.mode!r}")
        if self.checkpoint_every is not None and self.checkpoint_every < 1:
            raise ValueError("checkpoint-every must be positive")
        return self.source()

    def source(self):
        return StreamSource(self.dist, self.n, self.k, u=self.u, seed=self.seed,
                            placement=self.placement, eps=self.eps)


def run_one(spec: RunSpec):
    """Run one spec; returns (rows, run)."""
    src = spec.validate()
    cfg = TrackerConfig(k=spec.k, eps=spec.eps, phi=spec.phi, u=src.u)
    rows = []

    def record(run, seq):
        led = run.ledger
        rows.append([spec.tracker, spec.k, spec.eps, spec.phi, run.steps, led.messages,
                     led.words, len(run.report),
                     f"{bound_messages(spec.tracker, spec.k, spec.eps, run.steps):.6g}"])

    run = SimulationRun(cfg, spec.tracker, spec.mode, spec.checkpoint_every,
                        spec.invariants, on_checkpoint=record)
    run.source = src
    run.run_to_completion(src)
    if not rows or rows[-1][4] != run.steps:
        if run.steps:
            record(run, run.last_seq)
    return rows, run


def csv_text(rows, header=True):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def run_experiments(specs, out=None):
    """Run every spec, writing all rows to ``out`` (a path or a text stream).

    Returns the total number of violations.  An empty spec list writes nothing.
    """
    specs = list(specs)
    if not specs:
        return 0
    for s in specs:
        s.validate()
    if out is None or hasattr(out, "write"):
        return _run_to(specs, out)
    with open(out, "w", newline="") as fh:
        return _run_to(specs, fh)


def _run_to(specs, fh):
    writer = None
    if fh is not None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
    total = 0
    for s in specs:
        rows, run = run_one(s)
        total += len(run.report)
        if writer is not None:
            writer.writerows(rows)
    return total


def expand(grid):
    """Cartesian product of a dict of lists into RunSpecs."""
    keys = list(grid)
    for combo in itertools.product(*(grid[k] for k in keys)):
        yield RunSpec(**dict(zip(keys, combo)))


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def final_rows(paths):
    """The last row of each (tracker, k, eps, phi) run in the given CSVs."""
    out = []
    for p in paths:
        rows = read_rows(p)
        last = {}
        for r in rows:
            key = (r["tracker"], r["k"], r["eps"], r["phi"])
            prev = last.get(key)
            if prev is not None and int(r["n_so_far"]) <= int(prev["n_so_far"]):
                # n_so_far only grows within a run, so this is a new run
                out.append(prev)
            last[key] = r
        out.extend(last.values())
    return out


@dataclass
class Fit:
    parameter: str
    exponent: float
    intercept: float
    residual: float
    points: int


def fit_loglog(xs, ys, parameter="x"):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3 or len(set(xs.tolist())) < 3:
        raise ValueError("need at least 3 distinct points to fit a slope")
    A = np.vstack([np.log(xs), np.ones_like(xs)]).T
    coef, res, *_ = np.linalg.lstsq(A, np.log(ys), rcond=None)
    resid = float(np.sqrt(res[0] / len(xs))) if res.size else 0.0
    return Fit(parameter, float(coef[0]), float(coef[1]), resid, len(xs))


def fit_scaling(rows):
    """Exponent of total messages in the one parameter that varies.

    ``rows`` are final CSV rows (dicts).  Exactly one of k, 1/eps and n may
    vary, over at least 3 values; for n the regressor is log2(n).
    """
    rows = list(rows)
    if len(rows) < 3:
        raise ValueError("need at least 3 runs")
    ks = {r["k"] for r in rows}
    es = {r["eps"] for r in rows}
    ns = {r["n_so_far"] for r in rows}
    varying = [name for name, vals in (("k", ks), ("1/eps", es), ("log n", ns)) if len(vals) > 1]
    if len(varying) != 1:
        raise ValueError(f"exactly one of k, 1/eps, n must vary; varying: {varying or 'none'}")
    name = varying[0]
    if name == "k":
        xs = [float(r["k"]) for r in rows]
    elif name == "1/eps":
        xs = [1 / float(r["eps"]) for r in rows]
    else:
        xs = [math.log2(float(r["n_so_far"])) for r in rows]
    ys = [float(r["messages"]) for r in rows]
    return fit_loglog(xs, ys, name)
