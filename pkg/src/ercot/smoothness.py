"""Automatic temporal-smoothness weight via stacked density estimation.

Per matched cluster pair, the current cluster's held-out samples are scored
under a Gaussian fitted to the rest of the current cluster and under a
Gaussian fitted to the matched previous cluster. The mixing weight of the
previous model that maximises the held-out likelihood measures how well the
past explains the present; pair weights are pooled by cluster size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from .data import Snapshot, common_samples, normalize_zero_mean
from .genome import Partition, decode
from .nsga import Population, knee_of_population

DENSITY_FLOOR = 1e-300
RIDGE = 1e-6
LOG_2PI = np.log(2.0 * np.pi)


class InsufficientData(ValueError):
    """Too few points to fit or cross-validate a Gaussian."""


@dataclass(frozen=True, eq=False)
class GaussianModel:
    mean: np.ndarray
    covariance: np.ndarray
    log_normalizer: float
    _chol: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    def logpdf(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        z = np.linalg.solve(self._chol, (X - self.mean).T)
        return self.log_normalizer - 0.5 * np.einsum("ij,ij->j", z, z)

    def pdf(self, X: np.ndarray) -> np.ndarray:
        """Densities, floored at ``DENSITY_FLOOR``."""
        return np.maximum(np.exp(self.logpdf(X)), DENSITY_FLOOR)


def _model_from_moments(n: int, mean: np.ndarray, cov: np.ndarray) -> GaussianModel:
    dim = mean.shape[0]
    cov = 0.5 * (cov + cov.T)
    if n < dim + 2:
        cov = np.diag(np.diag(cov))
    cov = cov + RIDGE * max(np.trace(cov) / dim, 1.0) * np.eye(dim)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        cov = np.diag(np.maximum(np.diag(cov), RIDGE))
        chol = np.linalg.cholesky(cov)
    log_norm = -0.5 * dim * LOG_2PI - np.log(np.diag(chol)).sum()
    return GaussianModel(mean, cov, float(log_norm), chol)


def fit_gaussian(points: np.ndarray) -> GaussianModel:
    """Maximum-likelihood Gaussian with a small ridge.

    With fewer than ``D + 2`` points the covariance is restricted to its
    diagonal.
    """
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = X.shape[0]
    if n < 2:
        raise InsufficientData(f"need at least 2 points to fit a Gaussian, got {n}")
    mean = X.mean(axis=0)
    Y = X - mean
    return _model_from_moments(n, mean, Y.T @ Y / n)


def cv_likelihood_matrix(
    cluster_cur: np.ndarray, model_prev: GaussianModel, v_cap: int, rng: np.random.Generator
) -> np.ndarray:
    """Out-of-sample densities, shape ``(n, 2)``: column 0 under the fold-trained
    current model, column 1 under ``model_prev``.

    ``min(v_cap, n)`` folds are used, i.e. leave-one-out for small clusters.
    Fold models are the exact maximum-likelihood fits of the training part,
    obtained by subtracting fold moments from the cluster totals.
    """
    X = np.atleast_2d(np.asarray(cluster_cur, dtype=np.float64))
    n = X.shape[0]
    v = min(int(v_cap), n)
    if n < 3 or v < 2:
        raise InsufficientData(f"cross-validation needs at least 3 points and 2 folds, got n={n}, v={v}")
    perm = rng.permutation(n)
    sizes = np.array([f.size for f in np.array_split(perm, v)])
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    fold_of = np.repeat(np.arange(v), sizes)

    centre = X.mean(axis=0)
    Y = X[perm] - centre
    outer = Y[:, :, None] * Y[:, None, :]
    n_train = (n - sizes).astype(np.float64)
    means = (Y.sum(axis=0) - np.add.reduceat(Y, starts, axis=0)) / n_train[:, None]
    covs = (outer.sum(axis=0) - np.add.reduceat(outer, starts, axis=0)) / n_train[:, None, None]
    covs -= means[:, :, None] * means[:, None, :]

    out = np.empty((n, 2))
    out[perm, 0] = _fold_densities(Y, fold_of, n - sizes, means, covs)
    out[:, 1] = model_prev.pdf(X)
    return out


def _fold_densities(
    Y: np.ndarray, fold_of: np.ndarray, n_train: np.ndarray, means: np.ndarray, covs: np.ndarray
) -> np.ndarray:
    """Density of each row of ``Y`` under the model of its own fold, all folds at once.

    Applies the same diagonal rule and ridge as ``_model_from_moments``; folds
    whose covariance still fails to factorise go through that function one by one.
    """
    dim = Y.shape[1]
    raw = covs
    covs = 0.5 * (covs + covs.transpose(0, 2, 1))
    small = n_train < dim + 2
    if small.any():
        covs[small] = np.einsum("fii->fi", covs[small])[:, :, None] * np.eye(dim)
    ridge = RIDGE * np.maximum(np.einsum("fii->f", covs) / dim, 1.0)
    covs += ridge[:, None, None] * np.eye(dim)
    try:
        chols = np.linalg.cholesky(covs)
    except np.linalg.LinAlgError:
        chols = np.stack([_model_from_moments(int(k), m, c)._chol for k, m, c in zip(n_train, means, raw)])
    log_norm = -0.5 * dim * LOG_2PI - np.log(np.einsum("fii->fi", chols)).sum(axis=1)
    z = np.linalg.solve(chols[fold_of], (Y - means[fold_of])[:, :, None])[:, :, 0]
    return np.maximum(np.exp(log_norm[fold_of] - 0.5 * (z * z).sum(axis=1)), DENSITY_FLOOR)


def stack_log_likelihood(matrix: np.ndarray, alpha: float) -> float:
    return float(np.log((1.0 - alpha) * matrix[:, 0] + alpha * matrix[:, 1]).sum())


def _score(M: np.ndarray, alpha: float) -> float:
    """Derivative of the stacked log-likelihood; non-increasing in ``alpha``."""
    diff = M[:, 1] - M[:, 0]
    return float(np.sum(diff / ((1.0 - alpha) * M[:, 0] + alpha * M[:, 1])))


def em_alpha(matrix: np.ndarray, tol: float = 1e-6, max_iter: int = 500, start: float = 0.5) -> float:
    """Mixing weight of the previous-data model maximising the stacked likelihood.

    Runs the EM fixed-point iteration, then settles on the exact maximiser:
    the log-likelihood is concave in ``alpha``, so the sign of its derivative
    at the ends decides a boundary optimum and a bracketed root otherwise. EM
    alone can stall far from the optimum when the likelihood is nearly flat
    or the optimum lies on the boundary. A likelihood that is flat everywhere
    keeps the EM result.
    """
    M = np.asarray(matrix, dtype=np.float64)
    if M.ndim != 2 or M.shape[1] != 2 or M.shape[0] == 0:
        raise ValueError("likelihood matrix must be a non-empty (n, 2) array")
    M = M / M.max(axis=1, keepdims=True)
    cur, prev = M[:, 0].copy(), M[:, 1].copy()
    n = cur.size
    weighted = np.empty(n)
    denom = np.empty(n)
    alpha = start
    for _ in range(max_iter):
        np.multiply(prev, alpha, out=weighted)
        np.multiply(cur, 1.0 - alpha, out=denom)
        denom += weighted
        np.divide(weighted, denom, out=weighted)
        new = float(np.add.reduce(weighted)) / n
        done = abs(new - alpha) < tol
        alpha = new
        if done:
            break
    alpha = min(max(alpha, 0.0), 1.0)

    at_zero, at_one = _score(M, 0.0), _score(M, 1.0)
    if at_zero <= 0.0 and at_one >= 0.0:
        return alpha  # flat likelihood
    if at_zero <= 0.0:
        return 0.0
    if at_one >= 0.0:
        return 1.0
    return float(brentq(lambda a: _score(M, a), 0.0, 1.0, xtol=1e-12))


def overlap_table(cur: Partition, prev: Partition, common_ids: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts of shared ids per (current cluster, previous cluster)."""
    a = cur.restrict(common_ids).labels
    b = prev.restrict(common_ids).labels
    ca, ia = np.unique(a, return_inverse=True)
    cb, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ca.size, cb.size), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table, ca, cb


def match_clusters(cur: Partition, prev: Partition, common_ids: np.ndarray) -> list[tuple[int, int]]:
    """One-to-one cluster matching maximising the total number of shared samples."""
    common_ids = np.asarray(common_ids)
    if common_ids.size == 0:
        raise ValueError("no common samples to match clusters on")
    table, ca, cb = overlap_table(cur, prev, common_ids)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return [(int(ca[r]), int(cb[c])) for r, c in zip(rows, cols)]


@dataclass(frozen=True)
class PairWeight:
    index: int
    cur_cluster: int
    prev_cluster: int
    alpha: float
    n_prev: int
    n_cur: int


@dataclass(frozen=True)
class WeightRecord:
    pairs: tuple[PairWeight, ...]
    alpha: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "pairs": [
                {
                    "pair": p.index,
                    "cur_cluster": p.cur_cluster,
                    "prev_cluster": p.prev_cluster,
                    "alpha": p.alpha,
                    "n_prev": p.n_prev,
                    "n_cur": p.n_cur,
                }
                for p in self.pairs
            ],
        }


def aggregate_weights(pairs: tuple[PairWeight, ...] | list[PairWeight]) -> float:
    """Size-weighted mean of pair weights over matched pairs only."""
    mass = sum(p.n_prev + p.n_cur for p in pairs)
    if mass == 0:
        return 0.0
    return float(sum((p.n_prev + p.n_cur) * p.alpha for p in pairs) / mass)


def pseudo_partition(parents: Population, offspring: Population, s: Snapshot) -> Partition:
    """Knee of the plain-fitness non-dominated set of ``parents + offspring``, decoded on ``s``."""
    union = parents.union(offspring)
    if union.accumulated:
        raise ValueError("pseudo partition needs plain (non-accumulated) fitness")
    return decode(union.genomes[knee_of_population(union)], s, union.c_max)


def tune_weight(
    prev_partition: Partition,
    prev: Snapshot,
    parents: Population,
    offspring: Population,
    cur: Snapshot,
    v_cap: int,
    rng: np.random.Generator,
) -> WeightRecord:
    ids = common_samples(prev, cur)
    if ids.size == 0:
        return WeightRecord((), 0.0)
    prev_n = normalize_zero_mean(prev)
    cur_n = normalize_zero_mean(cur)
    Xp = prev_n.X[prev_n.rows_of(ids)]
    Xc = cur_n.X[cur_n.rows_of(ids)]
    lab_prev = prev_partition.restrict(ids).labels
    lab_cur = pseudo_partition(parents, offspring, cur).restrict(ids).labels
    cur_p = Partition(ids, lab_cur, ())
    prev_p = Partition(ids, lab_prev, ())

    pairs = []
    for i, (c_cur, c_prev) in enumerate(match_clusters(cur_p, prev_p, ids)):
        A_prev = Xp[lab_prev == c_prev]
        A_cur = Xc[lab_cur == c_cur]
        try:
            model_prev = fit_gaussian(A_prev)
            alpha_i = em_alpha(cv_likelihood_matrix(A_cur, model_prev, v_cap, rng))
        except InsufficientData:
            alpha_i = 0.0
        pairs.append(PairWeight(i, c_cur, c_prev, alpha_i, int(A_prev.shape[0]), int(A_cur.shape[0])))
    pairs_t = tuple(pairs)
    return WeightRecord(pairs_t, aggregate_weights(pairs_t))
