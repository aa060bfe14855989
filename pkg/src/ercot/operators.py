"""Single-point crossover and polynomial mutation on flat real genomes."""

from __future__ import annotations

import numpy as np


def single_point_crossover(p1: np.ndarray, p2: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Swap tails after position ``k`` (``0 < k < len``)."""
    if not 0 < k < p1.size:
        raise ValueError(f"crossover point {k} outside (0, {p1.size})")
    return np.concatenate([p1[:k], p2[k:]]), np.concatenate([p2[:k], p1[k:]])


def polynomial_perturbation(u: np.ndarray, eta: float) -> np.ndarray:
    """Map uniforms in [0, 1) to polynomial-mutation steps in [-1, 1].

    The step has CDF ``(1 + d)**(eta + 1) / 2`` on [-1, 0] and
    ``1 - (1 - d)**(eta + 1) / 2`` on [0, 1].
    """
    u = np.asarray(u, dtype=np.float64)
    power = 1.0 / (eta + 1.0)
    return np.where(u < 0.5, (2.0 * u) ** power - 1.0, 1.0 - (2.0 * (1.0 - u)) ** power)


def polynomial_cdf(d: np.ndarray, eta: float) -> np.ndarray:
    d = np.clip(np.asarray(d, dtype=np.float64), -1.0, 1.0)
    return np.where(d <= 0.0, 0.5 * (1.0 + d) ** (eta + 1.0), 1.0 - 0.5 * (1.0 - d) ** (eta + 1.0))


def crossover_population(
    parents: np.ndarray, rate: float, rng: np.random.Generator
) -> np.ndarray:
    """Pair consecutive rows; each pair crosses over with probability ``rate``."""
    n, length = parents.shape
    n_pairs = n // 2
    do = rng.random(n_pairs) < rate
    points = rng.integers(1, length, size=n_pairs) if length > 1 else np.zeros(n_pairs, dtype=int)
    children = parents.copy()
    if length < 2 or not do.any():
        return children
    pairs = np.flatnonzero(do)
    a, b = 2 * pairs, 2 * pairs + 1
    tail = np.arange(length)[None, :] >= points[pairs, None]
    children[a] = np.where(tail, parents[b], parents[a])
    children[b] = np.where(tail, parents[a], parents[b])
    return children


def mutate_population(
    G: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    rate: float,
    eta: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Polynomial mutation: an individual mutates with probability ``rate``, each of
    its genes with probability ``1 / len(genome)``; mutated genes are clipped to bounds."""
    n, length = G.shape
    individual = rng.random(n) < rate
    gene = rng.random((n, length)) < 1.0 / length
    u = rng.random((n, length))
    rows, cols = np.nonzero(individual[:, None] & gene)
    out = G.copy()
    out[rows, cols] = np.clip(
        G[rows, cols] + polynomial_perturbation(u[rows, cols], eta) * (upper - lower)[cols],
        lower[cols],
        upper[cols],
    )
    return out
