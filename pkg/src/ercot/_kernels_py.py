"""Numpy implementation of the population kernels.

Mirrors ``_kernels.pyx`` function for function; used when the compiled module
is not importable or ``ERCOT_PURE_PYTHON`` is set.
"""

from __future__ import annotations

import numpy as np

SEP_PENALTY = 1e12


def _split(genomes: np.ndarray, c_max: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    active = genomes[:, :c_max] >= 0.5
    centroids = genomes[:, c_max:].reshape(genomes.shape[0], c_max, dim)
    return active, centroids


def _nearest(genomes: np.ndarray, X: np.ndarray, c_max: int) -> tuple[np.ndarray, np.ndarray]:
    n_pop = genomes.shape[0]
    active, centroids = _split(genomes, c_max, X.shape[1])
    d2 = np.empty((n_pop, X.shape[0], c_max))
    for c in range(c_max):
        diff = X[None, :, :] - centroids[:, c, None, :]
        d2[:, :, c] = np.einsum("nsd,nsd->ns", diff, diff)
    d2[~np.broadcast_to(active[:, None, :], d2.shape)] = np.inf
    labels = np.argmin(d2, axis=2)
    best = np.take_along_axis(d2, labels[:, :, None], axis=2)[:, :, 0]
    empty = ~active.any(axis=1)
    labels[empty] = -1
    return labels, best


def assign(genomes: np.ndarray, X: np.ndarray, c_max: int) -> tuple[np.ndarray, np.ndarray]:
    labels, best = _nearest(genomes, X, c_max)
    return labels.astype(np.int64), np.sqrt(best)


def encode(
    genomes: np.ndarray,
    X_assign: np.ndarray,
    X_mean: np.ndarray,
    c_max: int,
    lo: np.ndarray,
    hi: np.ndarray,
) -> np.ndarray:
    n_pop = genomes.shape[0]
    dim = X_assign.shape[1]
    labels, _ = _nearest(genomes, X_assign, c_max)
    out = np.array(genomes, dtype=np.float64, copy=True)
    active, _ = _split(genomes, c_max, dim)
    for n in range(n_pop):
        if not active[n].any():
            continue
        lab = labels[n]
        counts = np.bincount(lab, minlength=c_max)
        sums = np.stack(
            [np.bincount(lab, weights=X_mean[:, d], minlength=c_max) for d in range(dim)],
            axis=1,
        )
        for c in np.flatnonzero(active[n]):
            if counts[c] == 0:
                out[n, c] = 0.0
                continue
            off = c_max + c * dim
            out[n, off : off + dim] = np.clip(sums[c] / counts[c], lo, hi)
    return out


def evaluate(genomes: np.ndarray, X: np.ndarray, c_max: int) -> np.ndarray:
    n_pop = genomes.shape[0]
    _, best = _nearest(genomes, X, c_max)
    F = np.empty((n_pop, 2))
    F[:, 0] = np.sqrt(best).sum(axis=1)
    active, centroids = _split(genomes, c_max, X.shape[1])
    for n in range(n_pop):
        idx = np.flatnonzero(active[n])
        if idx.size == 0:
            F[n] = (np.inf, SEP_PENALTY)
            continue
        if idx.size < 2:
            F[n, 1] = SEP_PENALTY
            continue
        z = centroids[n, idx]
        diff = z[:, None, :] - z[None, :, :]
        d2 = np.einsum("abd,abd->ab", diff, diff)[np.triu_indices(idx.size, 1)]
        m = d2.min()
        F[n, 1] = SEP_PENALTY if m == 0.0 else min(1.0 / np.sqrt(m), SEP_PENALTY)
    return F


def pareto_ranks(F: np.ndarray) -> np.ndarray:
    """Front index per row (1 = non-dominated) under componentwise minimisation."""
    n = F.shape[0]
    ranks = np.zeros(n, dtype=np.int64)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt
    dominated_by = dom.sum(axis=0)
    remaining = np.ones(n, dtype=bool)
    level = 1
    while remaining.any():
        current = remaining & (dominated_by == 0)
        ranks[current] = level
        remaining &= ~current
        dominated_by = dominated_by - dom[current].sum(axis=0)
        level += 1
    return ranks
