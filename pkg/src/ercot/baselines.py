"""Comparison algorithms: static and penalty-based evolutionary clustering, and
k-means with temporally smoothed centroid updates."""

from __future__ import annotations

import time

import numpy as np
from scipy.optimize import linear_sum_assignment

from .data import Snapshot, TemporalDataset
from .engine import EngineConfig, RunResult, StepResult, StepState, run
from .genome import Partition
from .metrics import score_partitions

MAX_LLOYD_ITER = 100


def run_static_ec(data: TemporalDataset, cfg: EngineConfig) -> RunResult:
    """Independent clustering of every snapshot with the same engine and budget."""
    return run(data, cfg, "static")


def run_penalty_ec(data: TemporalDataset, cfg: EngineConfig) -> RunResult:
    """Second objective replaced by ``1 - NMI`` against the previous partition from t=2 on."""
    return run(data, cfg, "penalty")


def _nearest(X: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((X[:, None, :] - Z[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, np.sqrt(d2[np.arange(X.shape[0]), labels])


def smoothed_lloyd(
    X: np.ndarray,
    init: np.ndarray,
    anchors: np.ndarray | None,
    alpha: float,
    max_iter: int = MAX_LLOYD_ITER,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Lloyd iterations with ``z = (1 - alpha) * mean + alpha * anchor``.

    Without anchors this is plain k-means. A centroid that loses all its
    samples keeps its previous value. Returns ``(centroids, labels, n_iter)``.
    """
    Z = np.array(init, dtype=np.float64)
    labels = None
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_labels, _ = _nearest(X, Z)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(Z.shape[0]):
            members = labels == c
            if not members.any():
                continue
            mean = X[members].mean(axis=0)
            Z[c] = mean if anchors is None else (1.0 - alpha) * mean + alpha * anchors[c]
    if labels is None:
        labels, _ = _nearest(X, Z)
    return Z, labels, n_iter


def _match_anchors(init: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Reorder ``anchors`` so anchor ``c`` is the one closest to start centroid ``c``."""
    cost = np.linalg.norm(init[:, None, :] - anchors[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(anchors)
    out[rows] = anchors[cols]
    return out


def kmeans_cot_step(
    s: Snapshot,
    k: int,
    alpha: float,
    prev_centroids: np.ndarray | None,
    restarts: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Best of ``restarts`` smoothed k-means runs on ``s`` by total temporal cost."""
    if k > s.n_samples:
        raise ValueError(f"k={k} exceeds the {s.n_samples} samples at t={s.time_index}")
    best = None
    for _ in range(max(restarts, 1)):
        init = s.X[rng.choice(s.n_samples, size=k, replace=False)]
        anchors = None if prev_centroids is None else _match_anchors(init, prev_centroids)
        Z, labels, _ = smoothed_lloyd(s.X, init, anchors, alpha)
        snapshot_cost = float(((s.X - Z[labels]) ** 2).sum())
        temporal = 0.0 if anchors is None else float(((Z - anchors) ** 2).sum())
        cost = (1.0 - alpha) * snapshot_cost + alpha * temporal
        if best is None or cost < best[0]:
            best = (cost, Z, labels)
    return best[1], best[2]


def run_kmeans_cot(data: TemporalDataset, k: int, alpha: float, cfg: EngineConfig) -> RunResult:
    """k-means with smoothed centroid updates; t=1 is plain k-means.

    Restarts per step are ``budget // pop`` so the number of full clusterings
    matches the number of evolutionary generations' worth of evaluations.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    rng = np.random.default_rng(cfg.seed)
    restarts = cfg.budget // cfg.pop
    result = RunResult("kmeanscot", data.name, cfg.seed)
    Z_prev = None
    for s in data:
        start = time.perf_counter()
        Z, labels = kmeans_cot_step(s, k, alpha, Z_prev, restarts, rng)
        part = Partition(s.ids, labels.astype(np.int64), tuple(range(k)))
        result.append(StepResult(s.time_index, StepState(None, s, part), None, None, restarts, time.perf_counter() - start))
        Z_prev = Z
    if all(s.has_labels for s in data):
        result.scores = score_partitions(result.partitions, data)
    return result
