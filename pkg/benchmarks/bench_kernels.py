"""Compiled vs pure-Python Fenwick kernel: raw operations and a full run.

    python3 benchmarks/bench_kernels.py [--size 65536] [--ops 200000] [--n 100000]
"""
import argparse
import time

import numpy as np

from disttrack import fenwick
from disttrack.simulator import simulate


def raw_ops(cls, size, ops, seed=0):
    rng = np.random.default_rng(seed)
    idx = rng.integers(1, size + 1, size=ops).tolist()
    t = cls(size)
    start = time.perf_counter()
    for i in idx:
        t.add(i, 1)
    for i in idx:
        t.prefix(i)
    for r in range(1, ops + 1, max(1, ops // 10_000)):
        t.find_kth(r)
    return time.perf_counter() - start


def full_run(name, tracker, n):
    fenwick.use_backend(name)
    start = time.perf_counter()
    run = simulate(tracker, k=4, eps=0.05, n=n, dist="zipf:1.2", phi=0.2,
                   checkpoint_every=n // 100)
    elapsed = time.perf_counter() - start
    return elapsed, run.ledger.fingerprint()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1 << 16)
    ap.add_argument("--ops", type=int, default=200_000)
    ap.add_argument("--n", type=int, default=100_000)
    args = ap.parse_args(argv)
    names = sorted(fenwick.BACKENDS)
    if "compiled" not in names:
        print("compiled kernel not built; only the Python backend is timed")
    default = fenwick.backend
    print(f"{'case':<24}" + "".join(f"{nm:>12}" for nm in names))
    raw = [raw_ops(fenwick.BACKENDS[nm], args.size, args.ops) for nm in names]
    print(f"{'raw add/prefix/find':<24}" + "".join(f"{t:>11.3f}s" for t in raw))
    for tracker in ("quantile", "allq"):
        times, prints = [], []
        for nm in names:
            t, fp = full_run(nm, tracker, args.n)
            times.append(t)
            prints.append(fp)
        same = all(p == prints[0] for p in prints)
        print(f"{tracker + ' run':<24}" + "".join(f"{t:>11.3f}s" for t in times)
              + ("" if same else "  LEDGERS DIFFER"))
    fenwick.use_backend(default)


if __name__ == "__main__":
    main()
