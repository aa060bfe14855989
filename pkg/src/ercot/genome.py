"""Hybrid real encoding of partitions.

A genome is ``c_max`` activation masks followed by ``c_max`` centroids of
dimension ``D``; centroid ``c`` is active when its mask is at least 0.5. The
engine works on stacked genomes (one row per individual, see :func:`layout`);
the :class:`Genome` dataclass is the single-individual view.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .data import Snapshot, common_samples

ACTIVE_THRESHOLD = 0.5
MIN_CLUSTERS = 2


class TransformImpossible(ValueError):
    """Two snapshots share no samples, so centroids cannot be carried across."""


def layout(c_max: int, dim: int) -> int:
    """Length of a flat genome."""
    return c_max * (dim + 1)


@dataclass(frozen=True, eq=False)
class Genome:
    masks: np.ndarray
    centroids: np.ndarray
    bounds: tuple[np.ndarray, np.ndarray]

    @property
    def c_max(self) -> int:
        return int(self.masks.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])

    def __len__(self) -> int:
        return layout(self.c_max, self.dim)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.masks, self.centroids.ravel()])

    @classmethod
    def from_vector(cls, vec: np.ndarray, c_max: int, bounds: tuple[np.ndarray, np.ndarray]) -> Genome:
        vec = np.asarray(vec, dtype=np.float64)
        dim = (vec.size - c_max) // c_max
        if layout(c_max, dim) != vec.size:
            raise ValueError(f"genome of length {vec.size} does not fit c_max={c_max}")
        return cls(vec[:c_max].copy(), vec[c_max:].reshape(c_max, dim).copy(), _as_bounds(bounds, dim))

    @property
    def active(self) -> np.ndarray:
        return np.flatnonzero(self.masks >= ACTIVE_THRESHOLD)


@dataclass(frozen=True, eq=False)
class Partition:
    """Hard assignment of each sample id to a centroid index of the genome."""

    ids: np.ndarray
    labels: np.ndarray
    active: tuple[int, ...]

    @property
    def n_clusters(self) -> int:
        """Number of non-empty clusters."""
        return int(np.unique(self.labels).size)

    def as_dict(self) -> dict[int, int]:
        return {int(i): int(c) for i, c in zip(self.ids, self.labels)}

    def restrict(self, ids: np.ndarray) -> Partition:
        pos = np.searchsorted(self.ids, ids)
        if np.any(pos >= self.ids.size) or np.any(self.ids[np.minimum(pos, self.ids.size - 1)] != ids):
            raise KeyError("partition does not cover the requested ids")
        return Partition(np.asarray(ids), self.labels[pos], self.active)

    def clusters(self) -> dict[int, np.ndarray]:
        return {int(c): self.ids[self.labels == c] for c in np.unique(self.labels)}


def _as_bounds(bounds, dim: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = (np.broadcast_to(np.asarray(b, dtype=np.float64), (dim,)).copy() for b in bounds)
    if np.any(hi < lo):
        raise ValueError("upper bound below lower bound")
    return lo, hi


# --- population-level operations (rows are flat genomes) ---------------------


def gene_bounds(c_max: int, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-gene lower/upper bounds: [0, 1] for masks, the data box for centroids."""
    return (
        np.concatenate([np.zeros(c_max), np.tile(lo, c_max)]),
        np.concatenate([np.ones(c_max), np.tile(hi, c_max)]),
    )


def random_genomes(n: int, c_max: int, lo: np.ndarray, hi: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    dim = lo.shape[0]
    masks = rng.random((n, c_max))
    cents = rng.uniform(np.tile(lo, c_max), np.tile(hi, c_max), size=(n, c_max * dim))
    return repair_population(np.hstack([masks, cents]), c_max, lo, hi, rng)


def repair_population(
    G: np.ndarray, c_max: int, lo: np.ndarray, hi: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Clip genes into bounds and raise the largest inactive masks until two are active."""
    n = G.shape[0]
    G = np.array(G, dtype=np.float64)
    masks = G[:, :c_max]
    np.clip(masks, 0.0, 1.0, out=masks)
    cents = G[:, c_max:].reshape(n, c_max, -1)
    np.clip(cents, lo, hi, out=cents)
    G[:, c_max:] = cents.reshape(n, -1)
    n_active = (masks >= ACTIVE_THRESHOLD).sum(axis=1)
    for n in np.flatnonzero(n_active < MIN_CLUSTERS):
        inactive = np.flatnonzero(masks[n] < ACTIVE_THRESHOLD)
        order = inactive[np.argsort(-masks[n, inactive], kind="stable")]
        for c in order[: MIN_CLUSTERS - n_active[n]]:
            masks[n, c] = ACTIVE_THRESHOLD + rng.uniform(0.0, 0.5)
    return G


def refine_population(
    G: np.ndarray, X: np.ndarray, c_max: int, lo: np.ndarray, hi: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """One assign-then-recompute pass on ``X`` followed by repair."""
    return repair_population(kernels.encode(G, X, X, c_max, lo, hi), c_max, lo, hi, rng)


def transform_population(
    G: np.ndarray,
    src: Snapshot,
    dst: Snapshot,
    c_max: int,
    rng: np.random.Generator,
    repair: bool = True,
) -> np.ndarray:
    """Carry centroids from ``src``'s data space into ``dst``'s via the shared samples.

    Memberships are decoded on ``src`` and re-encoded as means over ``dst``,
    using only ids present in both snapshots.
    """
    ids = common_samples(src, dst)
    if ids.size == 0:
        raise TransformImpossible(f"no common samples between t={src.time_index} and t={dst.time_index}")
    lo, hi = dst.bounds()
    out = kernels.encode(G, src.X[src.rows_of(ids)], dst.X[dst.rows_of(ids)], c_max, lo, hi)
    return repair_population(out, c_max, lo, hi, rng) if repair else out


def decode(vec: np.ndarray, s: Snapshot, c_max: int) -> Partition:
    labels, _ = kernels.assign(vec[None, :], s.X, c_max)
    return Partition(s.ids.copy(), labels[0], tuple(int(c) for c in np.flatnonzero(vec[:c_max] >= ACTIVE_THRESHOLD)))


# --- single-genome contract --------------------------------------------------


def random_genome(c_max: int, bounds, rng: np.random.Generator) -> Genome:
    if c_max < MIN_CLUSTERS:
        raise ValueError("c_max must be >= 2")
    lo, hi = _as_bounds(bounds, np.atleast_1d(np.asarray(bounds[0])).size)
    return Genome.from_vector(random_genomes(1, c_max, lo, hi, rng)[0], c_max, (lo, hi))


def active_centroids(g: Genome) -> list[tuple[int, np.ndarray]]:
    return [(int(c), g.centroids[c].copy()) for c in g.active]


def repair(g: Genome, rng: np.random.Generator) -> Genome:
    lo, hi = g.bounds
    return Genome.from_vector(repair_population(g.to_vector()[None, :], g.c_max, lo, hi, rng)[0], g.c_max, g.bounds)


def _ensure_valid(g: Genome, rng: np.random.Generator | None) -> Genome:
    if g.active.size >= MIN_CLUSTERS:
        return g
    return repair(g, rng if rng is not None else np.random.default_rng(0))


def assign_memberships(g: Genome, s: Snapshot, rng: np.random.Generator | None = None) -> Partition:
    """Nearest active centroid for every sample (ties to the lowest index)."""
    if s.dim != g.dim:
        raise ValueError(f"genome dimension {g.dim} does not match data dimension {s.dim}")
    g = _ensure_valid(g, rng)
    return decode(g.to_vector(), s, g.c_max)


def recompute_centroids(g: Genome, p: Partition, s: Snapshot, rng: np.random.Generator | None = None) -> Genome:
    """Move each active centroid to the mean of its members' coordinates in ``s``.

    Only ids present in both ``p`` and ``s`` contribute. Active centroids left
    without members are deactivated.
    """
    ids = np.intersect1d(p.ids, s.ids, assume_unique=True)
    labels = p.restrict(ids).labels
    X = s.X[s.rows_of(ids)]
    lo, hi = g.bounds
    masks = g.masks.copy()
    cents = g.centroids.copy()
    for c in g.active:
        members = X[labels == c]
        if members.shape[0] == 0:
            masks[c] = 0.0
        else:
            cents[c] = np.clip(members.mean(axis=0), lo, hi)
    out = replace(g, masks=masks, centroids=cents)
    return repair(out, rng if rng is not None else np.random.default_rng(0))


def transform_centroids(
    g: Genome, src: Snapshot, dst: Snapshot, rng: np.random.Generator | None = None
) -> Genome:
    """Re-express ``g`` in ``dst``'s data space; raises :class:`TransformImpossible`."""
    rng = rng if rng is not None else np.random.default_rng(0)
    out = transform_population(g.to_vector()[None, :], src, dst, g.c_max, rng)
    return Genome.from_vector(out[0], g.c_max, dst.bounds())
