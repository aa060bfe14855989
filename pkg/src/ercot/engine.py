"""Evolutionary clustering over time.

At every time step a population of genomes is evolved on the current snapshot
with plain two-objective fitness. Only in the last generation of steps after
the first is fitness blended with fitness on the previous snapshot, using an
automatically inferred weight, so temporal smoothness shapes the final
selection without steering the search.

Three modes share this loop: ``"ercot"`` (inherit + accumulate), ``"static"``
(fresh start every step, no accumulation) and ``"penalty"`` (inherit, and
replace separation with ``1 - NMI`` against the previous partition).
"""

from __future__ import annotations

import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import Snapshot, TemporalDataset
from .genome import (
    Partition,
    TransformImpossible,
    decode,
    gene_bounds,
    random_genomes,
    refine_population,
    repair_population,
    transform_population,
)
from .metrics import ScoreSeries, nmi, score_partitions
from .nsga import Population, binary_tournament, environmental_selection, knee_of_population, rank_and_crowding
from .objectives import accumulate_population
from .operators import crossover_population, mutate_population
from .smoothness import WeightRecord, tune_weight

MODES = ("ercot", "static", "penalty")

Scorer = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EngineConfig:
    pop: int = 100
    c_max: int = 8
    budget: int = 1000
    reinit_p: float = 0.8
    cx_rate: float = 0.9
    mut_rate: float = 0.9
    mut_eta: float = 20.0
    seed: int = 0
    cv_folds: int = 500

    def __post_init__(self) -> None:
        if self.pop < 4:
            raise ValueError(f"population size must be >= 4, got {self.pop}")
        if self.c_max < 2:
            raise ValueError(f"c_max must be >= 2, got {self.c_max}")
        if self.budget < 2 * self.pop:
            raise ValueError(f"budget {self.budget} is below 2 * population ({2 * self.pop})")
        if not 0.0 <= self.reinit_p <= 1.0:
            raise ValueError("reinit_p must lie in [0, 1]")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")

    @property
    def generations(self) -> int:
        """Generations per step after the initial population (which costs ``pop`` evaluations)."""
        return self.budget // self.pop - 1


@dataclass
class StepState:
    """What a time step hands to the next one."""

    population: Population
    snapshot: Snapshot
    partition: Partition


@dataclass
class StepResult:
    t: int
    state: StepState
    alpha: float | None
    weights: WeightRecord | None
    evaluations: int
    seconds: float

    @property
    def partition(self) -> Partition:
        return self.state.partition


@dataclass
class RunResult:
    algorithm: str
    dataset: str
    seed: int
    times: list[int] = field(default_factory=list)
    partitions: list[Partition] = field(default_factory=list)
    alphas: list[float | None] = field(default_factory=list)
    weights: list[WeightRecord | None] = field(default_factory=list)
    n_clusters: list[int] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    evaluations: list[int] = field(default_factory=list)
    scores: ScoreSeries | None = None

    def append(self, step: StepResult) -> None:
        self.times.append(step.t)
        self.partitions.append(step.partition)
        self.alphas.append(step.alpha)
        self.weights.append(step.weights)
        self.n_clusters.append(step.partition.n_clusters)
        self.seconds.append(step.seconds)
        self.evaluations.append(step.evaluations)


# --- scoring -----------------------------------------------------------------


def plain_scorer(s: Snapshot, c_max: int) -> Scorer:
    return lambda G: kernels.evaluate(G, s.X, c_max)


def penalty_scorer(s: Snapshot, prev_partition: Partition, c_max: int) -> Scorer:
    """Compactness plus ``1 - NMI`` against the previous partition on shared ids."""
    ids = np.intersect1d(s.ids, prev_partition.ids)
    if ids.size == 0:
        return plain_scorer(s, c_max)
    X_common = s.X[s.rows_of(ids)]
    prev_labels = prev_partition.restrict(ids).labels

    def score(G: np.ndarray) -> np.ndarray:
        F = kernels.evaluate(G, s.X, c_max)
        labels, _ = kernels.assign(G, X_common, c_max)
        F[:, 1] = [1.0 - nmi(row, prev_labels) for row in labels]
        return F

    return score


# --- algorithm steps ---------------------------------------------------------


def _fresh(n: int, s: Snapshot, cfg: EngineConfig, rng: np.random.Generator) -> np.ndarray:
    lo, hi = s.bounds()
    G = random_genomes(n, cfg.c_max, lo, hi, rng)
    return refine_population(G, s.X, cfg.c_max, lo, hi, rng)


def initialize(
    s: Snapshot, cfg: EngineConfig, rng: np.random.Generator, scorer: Scorer | None = None
) -> tuple[Population, int]:
    """``pop`` random genomes, each refined once on ``s`` and evaluated."""
    scorer = scorer or plain_scorer(s, cfg.c_max)
    G = _fresh(cfg.pop, s, cfg, rng)
    return Population(G, scorer(G), cfg.c_max), cfg.pop


def reinitialize(
    prev_final: Population,
    prev: Snapshot,
    cur: Snapshot,
    cfg: EngineConfig,
    rng: np.random.Generator,
    scorer: Scorer | None = None,
) -> tuple[Population, int]:
    """Carry ``floor(reinit_p * pop)`` random survivors of the last step into the
    current data space; fill the rest with fresh random genomes."""
    if len(prev_final) == 0:
        raise ValueError("previous population is empty")
    scorer = scorer or plain_scorer(cur, cfg.c_max)
    k = min(int(np.floor(cfg.reinit_p * cfg.pop)), len(prev_final))
    idx = np.sort(rng.choice(len(prev_final), size=k, replace=False)) if k else np.empty(0, dtype=int)
    try:
        inherited = transform_population(prev_final.genomes[idx], prev, cur, cfg.c_max, rng) if k else None
    except TransformImpossible:
        inherited = None
    n_fresh = cfg.pop - (0 if inherited is None else inherited.shape[0])
    parts = [p for p in (inherited, _fresh(n_fresh, cur, cfg, rng) if n_fresh else None) if p is not None]
    G = np.vstack(parts)
    return Population(G, scorer(G), cfg.c_max), cfg.pop


def reproduce(
    parents: Population,
    s: Snapshot,
    cfg: EngineConfig,
    rng: np.random.Generator,
    scorer: Scorer | None = None,
) -> tuple[Population, int]:
    """Tournament mating, single-point crossover, polynomial mutation, repair,
    one refinement pass and evaluation."""
    scorer = scorer or plain_scorer(s, cfg.c_max)
    lo, hi = s.bounds()
    ranks, crowd = rank_and_crowding(parents.F)
    mating = binary_tournament(ranks, crowd, cfg.pop, rng)
    G = crossover_population(parents.genomes[mating], cfg.cx_rate, rng)
    glo, ghi = gene_bounds(cfg.c_max, lo, hi)
    G = mutate_population(G, glo, ghi, cfg.mut_rate, cfg.mut_eta, rng)
    G = repair_population(G, cfg.c_max, lo, hi, rng)
    G = refine_population(G, s.X, cfg.c_max, lo, hi, rng)
    return Population(G, scorer(G), cfg.c_max), cfg.pop


def run_time_step(
    t: int,
    snapshot: Snapshot,
    prev: StepState | None,
    cfg: EngineConfig,
    rng: np.random.Generator,
    mode: str = "ercot",
) -> StepResult:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    start = time.perf_counter()
    first = prev is None
    if mode == "penalty" and not first:
        scorer = penalty_scorer(snapshot, prev.partition, cfg.c_max)
    else:
        scorer = plain_scorer(snapshot, cfg.c_max)

    if first or mode == "static":
        P, evals = initialize(snapshot, cfg, rng, scorer)
    else:
        P, evals = reinitialize(prev.population, prev.snapshot, snapshot, cfg, rng, scorer)

    alpha = None
    record = None
    g_max = cfg.generations
    for g in range(1, g_max + 1):
        Q, n = reproduce(P, snapshot, cfg, rng, scorer)
        evals += n
        if mode == "ercot" and not first and g == g_max:
            record = tune_weight(prev.partition, prev.snapshot, P, Q, snapshot, cfg.cv_folds, rng)
            alpha = record.alpha
            F_p, n_p = accumulate_population(P.genomes, P.F, snapshot, prev.snapshot, alpha, cfg.c_max)
            F_q, n_q = accumulate_population(Q.genomes, Q.F, snapshot, prev.snapshot, alpha, cfg.c_max)
            evals += n_p + n_q
            P = environmental_selection(P.with_fitness(F_p, True), Q.with_fitness(F_q, True), cfg.pop)
        else:
            P = environmental_selection(P, Q, cfg.pop)

    partition = decode(P.genomes[knee_of_population(P)], snapshot, cfg.c_max)
    state = StepState(P, snapshot, partition)
    return StepResult(snapshot.time_index, state, alpha, record, evals, time.perf_counter() - start)


def run(data: TemporalDataset, cfg: EngineConfig, mode: str = "ercot", algorithm: str | None = None) -> RunResult:
    """Cluster every snapshot in order, threading each step's final state forward."""
    rng = np.random.default_rng(cfg.seed)
    result = RunResult(algorithm or mode, data.name, cfg.seed)
    prev: StepState | None = None
    for snap in data:
        step = run_time_step(snap.time_index, snap, prev, cfg, rng, mode)
        result.append(step)
        prev = step.state
    if all(s.has_labels for s in data):
        result.scores = score_partitions(result.partitions, data)
    return result


def run_ercot(data: TemporalDataset, cfg: EngineConfig) -> RunResult:
    return run(data, cfg, "ercot")
