"""Wall-clock timing of one full ERCOT step as the sample count and budget grow."""

from __future__ import annotations

import gc
import statistics
import time
from collections.abc import Iterable
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .data import TemporalDataset
from .engine import EngineConfig, run_time_step
from .generators import SYN1_SPECS, GaussianClusterSpec, gen_moving_gaussians


@dataclass(frozen=True)
class BenchRow:
    size: int
    budget: int
    backend: str
    seconds: float
    repeats: int


def bench_dataset(size: int, seed: int = 0) -> TemporalDataset:
    """Two snapshots of four 2-D Gaussians with ``size`` samples; one cluster shifts."""
    if size < 8:
        raise ValueError("bench size must be >= 8")
    counts = [size // 4 + (1 if c < size % 4 else 0) for c in range(4)]
    specs = [GaussianClusterSpec(s.mean, s.covariance_scale, n) for s, n in zip(SYN1_SPECS, counts)]
    return gen_moving_gaussians(specs, 2, 2, (0.6, 0.6), seed, name=f"bench_{size}")


def time_step(data: TemporalDataset, cfg: EngineConfig) -> float:
    """Seconds spent on the second step (inheritance, evolution, weight tuning and
    accumulation); the first step only provides the previous state."""
    rng = np.random.default_rng(cfg.seed)
    first = run_time_step(1, data[0], None, cfg, rng)
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()  # as timeit does: keep collector pauses out of the measurement
    try:
        start = time.perf_counter()
        run_time_step(2, data[1], first.state, cfg, rng)
        return time.perf_counter() - start
    finally:
        if was_enabled:
            gc.enable()


def run_bench(
    sizes: Iterable[int],
    budgets: Iterable[int],
    cfg: EngineConfig,
    repeats: int = 5,
    backend: str | None = None,
) -> list[BenchRow]:
    """Median-of-``repeats`` step time per (size, budget) cell.

    Repeats run round-robin over the cells (after one warm-up round), so a
    transient slowdown of the machine lands on every cell rather than
    inflating a single one.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    previous = kernels.BACKEND
    if backend is not None:
        kernels.use_backend(backend)
    try:
        cells = []
        for size in sizes:
            data = bench_dataset(size, cfg.seed)
            cells.extend((size, data, replace(cfg, budget=budget)) for budget in budgets)
        times: list[list[float]] = [[] for _ in cells]
        for round_ in range(repeats + 1):
            for k, (_, data, cell) in enumerate(cells):
                elapsed = time_step(data, cell)
                if round_:  # round 0 is the warm-up
                    times[k].append(elapsed)
        return [
            BenchRow(size, cell.budget, kernels.BACKEND, statistics.median(t), repeats)
            for (size, _, cell), t in zip(cells, times)
        ]
    finally:
        kernels.use_backend(previous)
