"""Rand index, normalised mutual information and their per-run aggregates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import TemporalDataset
from .genome import Partition


def _labels(x) -> np.ndarray:
    if isinstance(x, Partition):
        return x.labels
    return np.asarray(x).reshape(-1)


def contingency(pred, truth) -> np.ndarray:
    a, b = _labels(pred), _labels(truth)
    if a.shape != b.shape:
        raise ValueError(f"label vectors differ in length: {a.size} vs {b.size}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1 if ia.size else 0, ib.max() + 1 if ib.size else 0), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _pairs(k) -> int:
    k = int(k)
    return k * (k - 1) // 2


def rand_index(pred, truth) -> float:
    """Fraction of sample pairs on which the two labelings agree."""
    table = contingency(pred, truth)
    n = int(table.sum())
    if n < 2:
        raise ValueError("the Rand index needs at least two samples")
    total = _pairs(n)
    same_both = sum(_pairs(v) for v in table.ravel())
    same_pred = sum(_pairs(v) for v in table.sum(axis=1))
    same_truth = sum(_pairs(v) for v in table.sum(axis=0))
    agree = total + 2 * same_both - same_pred - same_truth
    return agree / total


def _entropy(counts, n: int) -> float:
    return -math.fsum((c / n) * math.log(c / n) for c in counts if c > 0)


def nmi(pred, truth) -> float:
    """Mutual information normalised by the geometric mean of the two entropies.

    Two single-cluster labelings score 1; a single cluster against a
    non-trivial labeling scores 0.
    """
    table = contingency(pred, truth)
    n = int(table.sum())
    if n == 0:
        raise ValueError("no samples")
    rows = [int(v) for v in table.sum(axis=1)]
    cols = [int(v) for v in table.sum(axis=0)]
    h_pred = _entropy(rows, n)
    h_truth = _entropy(cols, n)
    if h_pred == 0.0 and h_truth == 0.0:
        return 1.0
    if h_pred == 0.0 or h_truth == 0.0:
        return 0.0
    mi = math.fsum(
        (int(table[i, j]) / n) * math.log(n * int(table[i, j]) / (rows[i] * cols[j]))
        for i in range(table.shape[0])
        for j in range(table.shape[1])
        if table[i, j] > 0
    )
    return min(max(mi / math.sqrt(h_pred * h_truth), 0.0), 1.0)


@dataclass(frozen=True)
class ScoreSeries:
    per_time: tuple[tuple[int, float, float], ...]
    mRI: float
    mNMI: float

    @classmethod
    def from_per_time(cls, per_time) -> ScoreSeries:
        per_time = tuple((int(t), float(r), float(m)) for t, r, m in per_time)
        return cls(
            per_time,
            float(np.mean([r for _, r, _ in per_time])),
            float(np.mean([m for _, _, m in per_time])),
        )


def score_partitions(partitions, data: TemporalDataset) -> ScoreSeries:
    """Per-time RI/NMI of ``partitions`` (aligned with ``data``'s snapshots)."""
    rows = []
    for part, snap in zip(partitions, data):
        if not snap.has_labels:
            raise ValueError(f"snapshot t={snap.time_index} has no ground-truth labels")
        if not np.array_equal(part.ids, snap.ids):
            part = part.restrict(snap.ids)
        rows.append((snap.time_index, rand_index(part, snap.labels), nmi(part, snap.labels)))
    return ScoreSeries.from_per_time(rows)


def score_run(result, data: TemporalDataset) -> ScoreSeries:
    return score_partitions(result.partitions, data)
