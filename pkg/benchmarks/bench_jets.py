"""Benchmark the compiled jet-product kernel against the numpy fallback.

Runs the same workloads twice in subprocesses — once with the compiled
extension (if available) and once with ``CRTRACTOR_PURE=1`` — and prints a
comparison table.

    python3 benchmarks/bench_jets.py [--reps 2000] [--points 2]

Workloads:
  * micro: truncated polynomial products of random jets at orders 2/3/4 in
    six variables (the hot operation behind every derivative the library
    takes);
  * macro: order-3 curvature package (Christoffels, Riemann, Ricci, scalar,
    Schouten, Weyl, Cotton) of a curved Lorentzian coordinate metric.
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _worker(reps, points):
    import numpy as np

    from crtractor import _kernel
    from crtractor import jets as J
    from crtractor.jets import Jet, jet_tables
    from crtractor.oracle import CoordinateMetric

    results = {"implementation": _kernel.IMPLEMENTATION, "micro": {}, "macro": {}}

    rng = np.random.default_rng(0)
    dim = 6
    for order in (2, 3, 4):
        t = jet_tables(dim, order)
        a = Jet(dim, order, rng.normal(size=t.n_terms))
        b = Jet(dim, order, rng.normal(size=t.n_terms))
        for _ in range(200):  # warm up tables, kernel, and allocator
            a * b
        t0 = time.perf_counter()
        for _ in range(reps):
            a * b
        dt = time.perf_counter() - t0
        results["micro"][f"order_{order}"] = {
            "terms": t.n_terms,
            "reps": reps,
            "seconds": dt,
            "us_per_product": 1e6 * dt / reps,
        }

    x = J.coordinates(4)
    g = [
        [-1.0 - 0.2 * x[1] * x[1], 0.1 * x[2], 0.0, 0.0],
        [0.1 * x[2], 1.0 + 0.1 * x[0] * x[0], 0.0, 0.05 * x[1]],
        [0.0, 0.0, 1.0 + 0.1 * J.sin(x[0]), 0.0],
        [0.0, 0.05 * x[1], 0.0, 1.2 + 0.1 * x[2] * x[2]],
    ]
    cm = CoordinateMetric(g, 4)
    pts = [rng.uniform(-0.4, 0.4, size=4) for _ in range(points)]
    for p in pts:
        cm.package(p, 3).weyl  # warm up
    t0 = time.perf_counter()
    for _ in range(5):
        for p in pts:
            cm2 = CoordinateMetric(g, 4)  # fresh instance: defeat the cache
            pkg = cm2.package(p, 3)
            pkg.weyl
            pkg.cotton
    dt = time.perf_counter() - t0
    results["macro"]["curvature_package"] = {
        "points": points,
        "reps": 5,
        "seconds": dt,
        "ms_per_package": 1e3 * dt / (5 * points),
    }
    json.dump(results, sys.stdout)


def _run_backend(pure, argv):
    env = dict(os.environ)
    if pure:
        env["CRTRACTOR_PURE"] = "1"
    else:
        env.pop("CRTRACTOR_PURE", None)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker"] + argv,
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--points", type=int, default=2)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        _worker(args.reps, args.points)
        return

    argv = ["--reps", str(args.reps), "--points", str(args.points)]
    fast = _run_backend(False, argv)
    pure = _run_backend(True, argv)
    if fast["implementation"] == "numpy":
        print("note: compiled extension unavailable; comparing numpy to itself")

    print(f"{'workload':<28} {'compiled':>12} {'numpy':>12} {'speedup':>9}")
    for key, unit in [("micro", "us_per_product"), ("macro", "ms_per_package")]:
        for name, rec in fast[key].items():
            f, p = rec[unit], pure[key][name][unit]
            label = f"{name} ({unit.split('_')[0]})"
            print(f"{label:<28} {f:>12.2f} {p:>12.2f} {p / f:>8.2f}x")


if __name__ == "__main__":
    main()
