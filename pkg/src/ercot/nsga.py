"""Pareto ranking, crowding, environmental selection and knee selection."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from . import kernels
from .objectives import ObjectiveVector


class MixedFitnessError(ValueError):
    """Plain and accumulated objective vectors were compared in one selection."""


@dataclass(frozen=True)
class Individual:
    genome: np.ndarray
    objectives: ObjectiveVector
    rank: int = 0
    crowding: float = 0.0


@dataclass(eq=False)
class Population:
    """Stacked genomes with their objective matrix (``accumulated`` applies to all rows)."""

    genomes: np.ndarray
    F: np.ndarray
    c_max: int
    accumulated: bool = False

    def __len__(self) -> int:
        return int(self.genomes.shape[0])

    def __getitem__(self, i: int) -> Individual:
        f = self.F[i]
        return Individual(self.genomes[i].copy(), ObjectiveVector(float(f[0]), float(f[1]), self.accumulated))

    def take(self, idx: np.ndarray) -> Population:
        return Population(self.genomes[idx].copy(), self.F[idx].copy(), self.c_max, self.accumulated)

    def union(self, other: Population) -> Population:
        if self.accumulated != other.accumulated:
            raise MixedFitnessError("cannot merge populations scored with plain and accumulated fitness")
        return Population(
            np.vstack([self.genomes, other.genomes]), np.vstack([self.F, other.F]), self.c_max, self.accumulated
        )

    def with_fitness(self, F: np.ndarray, accumulated: bool) -> Population:
        return Population(self.genomes, np.asarray(F, dtype=np.float64), self.c_max, accumulated)


def objective_matrix(vectors: Sequence[ObjectiveVector] | Population | np.ndarray) -> np.ndarray:
    if isinstance(vectors, Population):
        return vectors.F
    if isinstance(vectors, np.ndarray):
        return np.atleast_2d(vectors)
    flags = {v.accumulated for v in vectors}
    if len(flags) > 1:
        raise MixedFitnessError("objective vectors mix plain and accumulated fitness")
    return np.array([[v.f_cp, v.f_sep] for v in vectors], dtype=np.float64).reshape(-1, 2)


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row ``i`` Pareto-dominates row ``j`` (minimisation)."""
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


def nondominated_sort(pop) -> np.ndarray:
    """Front index per row, starting at 1 for the non-dominated set."""
    F = objective_matrix(pop)
    if F.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return kernels.pareto_ranks(F)


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """Crowding distance within one front; boundary points get ``inf``."""
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        fk = F[order, k]
        span = fk[-1] - fk[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (fk[2:] - fk[:-2]) / span
    return dist


def crowding_by_front(F: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    """Crowding distance of every row within its own front, all fronts at once."""
    n, m = F.shape
    dist = np.zeros(n)
    if n == 0:
        return dist
    for k in range(m):
        order = np.lexsort((F[:, k], ranks))
        fk = F[order, k]
        rk = ranks[order]
        first = np.empty(n, dtype=bool)
        first[0] = True
        first[1:] = rk[1:] != rk[:-1]
        last = np.empty(n, dtype=bool)
        last[-1] = True
        last[:-1] = first[1:]
        seg = np.cumsum(first) - 1
        starts = np.flatnonzero(first)
        ends = np.flatnonzero(last)
        span = (fk[ends] - fk[starts])[seg]
        inner = np.flatnonzero(~first & ~last)
        ok = inner[span[inner] > 0]
        dist[order[ok]] += (fk[ok + 1] - fk[ok - 1]) / span[ok]
        dist[order[first | last]] = np.inf
    return dist


def rank_and_crowding(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ranks = nondominated_sort(F)
    return ranks, crowding_by_front(F, ranks)


def select_indices(F: np.ndarray, n: int) -> np.ndarray:
    """Indices of the ``n`` survivors under front order, then descending crowding."""
    ranks = nondominated_sort(F)
    chosen: list[np.ndarray] = []
    taken = 0
    for r in range(1, int(ranks.max()) + 1):
        idx = np.flatnonzero(ranks == r)
        if taken + idx.size <= n:
            chosen.append(idx)
            taken += idx.size
            if taken == n:
                break
            continue
        crowd = crowding_distance(F[idx])
        order = np.argsort(-crowd, kind="stable")
        chosen.append(idx[order[: n - taken]])
        break
    return np.concatenate(chosen)


def environmental_selection(parents: Population, offspring: Population, n: int | None = None) -> Population:
    union = parents.union(offspring)
    n = len(parents) if n is None else n
    return union.take(select_indices(union.F, n))


def binary_tournament(ranks: np.ndarray, crowd: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` winners of random pairwise contests on (lower rank, larger crowding)."""
    a, b = rng.integers(ranks.size, size=(2, n))
    a_wins = (ranks[a] < ranks[b]) | ((ranks[a] == ranks[b]) & (crowd[a] >= crowd[b]))
    return np.where(a_wins, a, b)


def knee_point(front) -> int:
    """Index of the knee of a two-objective front.

    Objectives are rescaled to [0, 1] over the front and the knee is the point
    farthest from the line through the two extreme points. Ties and fronts with
    fewer than three distinct points resolve to the smallest compactness.
    """
    F = objective_matrix(front)
    n = F.shape[0]
    if n == 0:
        raise ValueError("empty front")
    lo, hi = F.min(axis=0), F.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    Z = (F - lo) / span
    by_cp = np.lexsort((Z[:, 1], Z[:, 0]))
    if np.unique(Z, axis=0).shape[0] <= 2:
        return int(by_cp[0])
    a = Z[by_cp[0]]
    b = Z[np.lexsort((Z[:, 0], Z[:, 1]))[0]]
    direction = b - a
    length = np.hypot(*direction)
    if length == 0:
        return int(by_cp[0])
    rel = Z - a
    dist = np.abs(direction[0] * rel[:, 1] - direction[1] * rel[:, 0]) / length
    best = dist.max()
    cands = np.flatnonzero(dist >= best - 1e-12 * max(best, 1.0))
    return int(cands[np.lexsort((cands, Z[cands, 0]))[0]])


def knee_of_population(pop: Population) -> int:
    """Row index of the knee among the population's non-dominated rows."""
    ranks = nondominated_sort(pop.F)
    front = np.flatnonzero(ranks == 1)
    return int(front[knee_point(pop.F[front])])
