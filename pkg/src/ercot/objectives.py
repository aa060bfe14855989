"""Compactness/separation objectives and their temporal accumulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import Snapshot
from .genome import Genome, TransformImpossible, transform_population

SEP_PENALTY = kernels.SEP_PENALTY


@dataclass(frozen=True)
class ObjectiveVector:
    """Both objectives are minimised.

    ``f_cp`` sums unsquared distances from samples to their nearest active
    centroid; ``f_sep`` is the reciprocal of the smallest distance between two
    active centroids (``SEP_PENALTY`` when two coincide).
    """

    f_cp: float
    f_sep: float
    accumulated: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.f_cp, self.f_sep])


def eval_fitness(g: Genome, s: Snapshot) -> ObjectiveVector:
    if g.dim != s.dim:
        raise ValueError(f"genome dimension {g.dim} does not match data dimension {s.dim}")
    f = kernels.evaluate(g.to_vector()[None, :], s.X, g.c_max)[0]
    return ObjectiveVector(float(f[0]), float(f[1]))


def accumulate_population(
    G: np.ndarray,
    F_current: np.ndarray,
    current: Snapshot,
    previous: Snapshot,
    alpha: float,
    c_max: int,
) -> tuple[np.ndarray, int]:
    """Blend each row's fitness on ``current`` with its fitness on ``previous``.

    Returns the accumulated ``(N, 2)`` matrix and the number of extra
    evaluations spent on ``previous``. Rows whose centroids cannot be carried
    back (no shared samples, or fewer than two clusters survive) keep their
    plain fitness.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    F_acc = np.array(F_current, dtype=np.float64, copy=True)
    if alpha == 0.0:
        return F_acc, 0
    try:
        back = transform_population(G, current, previous, c_max, np.random.default_rng(0), repair=False)
    except TransformImpossible:
        return F_acc, 0
    ok = (back[:, :c_max] >= 0.5).sum(axis=1) >= 2
    if not ok.any():
        return F_acc, 0
    F_prev = kernels.evaluate(back[ok], previous.X, c_max)
    F_acc[ok] = (1.0 - alpha) * F_current[ok] + alpha * F_prev
    return F_acc, int(ok.sum())


def accumulate_fitness(g: Genome, current: Snapshot, previous: Snapshot, alpha: float) -> ObjectiveVector:
    vec = g.to_vector()[None, :]
    F_cur = kernels.evaluate(vec, current.X, g.c_max)
    F_acc, _ = accumulate_population(vec, F_cur, current, previous, alpha, g.c_max)
    return ObjectiveVector(float(F_acc[0, 0]), float(F_acc[0, 1]), accumulated=True)
