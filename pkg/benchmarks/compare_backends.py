"""Time the compiled and the numpy kernels side by side.

Two views are printed: raw kernel throughput on a random population, and
one full ERCOT step per sample count through ``ercot.bench``.

    python benchmarks/compare_backends.py --sizes 500,1000,2000,4000 --repeats 5
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from ercot import kernels
from ercot.bench import run_bench
from ercot.engine import EngineConfig
from ercot.genome import random_genomes


def kernel_timings(size: int, pop: int, c_max: int, repeats: int) -> dict[str, dict[str, float]]:
    rng = np.random.default_rng(0)
    X = rng.normal(size=(size, 2))
    lo, hi = X.min(axis=0), X.max(axis=0)
    G = random_genomes(pop, c_max, lo, hi, rng)
    ranks_input = rng.random((2 * pop, 2))
    calls = {
        "evaluate": lambda: kernels.evaluate(G, X, c_max),
        "assign": lambda: kernels.assign(G, X, c_max),
        "encode": lambda: kernels.encode(G, X, X, c_max, lo, hi),
        "pareto_ranks": lambda: kernels.pareto_ranks(ranks_input),
    }
    out: dict[str, dict[str, float]] = {}
    for backend in ("python", "cython"):
        kernels.use_backend(backend)
        out[backend] = {}
        for name, fn in calls.items():
            fn()
            times = []
            for _ in range(repeats):
                start = time.perf_counter()
                fn()
                times.append(time.perf_counter() - start)
            out[backend][name] = statistics.median(times)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="500,1000,2000,4000")
    parser.add_argument("--budget", type=int, default=1000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)
    if not kernels.compiled_available():
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    sizes = [int(s) for s in args.sizes.split(",")]
    original = kernels.BACKEND
    try:
        print("kernel medians (seconds), population 100, c_max 8")
        print(f"{'size':>6} {'kernel':>13} {'python':>10} {'cython':>10} {'speedup':>8}")
        for size in sizes:
            t = kernel_timings(size, 100, 8, args.repeats)
            for name in t["python"]:
                py, cy = t["python"][name], t["cython"][name]
                print(f"{size:>6} {name:>13} {py:>10.5f} {cy:>10.5f} {py / cy:>8.1f}")

        print(f"\nfull step medians (seconds), budget {args.budget}")
        print(f"{'size':>6} {'python':>10} {'cython':>10} {'speedup':>8}")
        cfg = EngineConfig(budget=args.budget)
        py = run_bench(sizes, [args.budget], cfg, args.repeats, "python")
        cy = run_bench(sizes, [args.budget], cfg, args.repeats, "cython")
        for a, b in zip(py, cy):
            print(f"{a.size:>6} {a.seconds:>10.4f} {b.seconds:>10.4f} {a.seconds / b.seconds:>8.2f}")
    finally:
        kernels.use_backend(original)
    return 0


if __name__ == "__main__":
    sys.exit(main())
