#!/usr/bin/env python3
"""Benchmark the jet-propagation hot loop: compiled kernel vs numpy fallback.

Usage: python benchmarks/bench_jets.py [--points 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from finslerlab import jets
from finslerlab.catalog import build_catalog_metric
from finslerlab.expressions import count_nodes
from finslerlab.points import Point


CASES = [
    ("flat n=2", dict(name="flat", n=2)),
    ("fubini_study n=2", dict(name="fubini_study", n=2)),
    ("randers n=2", dict(name="randers", n=2, c=0.4)),
    ("szabo k=2 n=2", dict(name="szabo", n1=1, n2=1, k=2.0)),
    ("szabo k=2 n=4", dict(name="szabo", n1=2, n2=2, k=2.0)),
]


def sample_points(n, count, seed=0):
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        z = rng.uniform(-0.5, 0.5, 2 * n)
        v = rng.uniform(0.3, 1.2, 2 * n)
        pts.append(Point(z[:n] + 1j * z[n:], v[:n] + 1j * v[n:]))
    return pts


def time_case(metric, pts, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        jets.eval_jet_batch(metric, pts)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["python"]
    try:
        jets.set_backend("compiled")
        backends.insert(0, "compiled")
    except ImportError:
        print("compiled kernel not built; benchmarking the fallback only")

    print(f"{'case':20s} {'nodes':>6s} {'points':>7s} "
          + "".join(f"{b:>14s}" for b in backends) + f"{'speedup':>9s}")
    for label, spec in CASES:
        spec = dict(spec)
        name = spec.pop("name")
        metric = build_catalog_metric(name, **spec)
        pts = sample_points(metric.n, args.points)
        times = {}
        for backend in backends:
            jets.set_backend(backend)
            times[backend] = time_case(metric, pts, args.repeat)
        cells = "".join(f"{times[b] * 1e3:11.1f} ms" for b in backends)
        speed = (f"{times['python'] / times['compiled']:8.1f}x"
                 if "compiled" in times else "      --")
        print(f"{label:20s} {count_nodes(metric.root):6d} {len(pts):7d} "
              + cells + speed)


if __name__ == "__main__":
    main()
