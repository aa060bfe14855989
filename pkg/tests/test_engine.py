import numpy as np
import pytest

from ercot.baselines import run_penalty_ec, run_static_ec
from ercot.data import Snapshot, TemporalDataset
from ercot.engine import (
    EngineConfig,
    initialize,
    penalty_scorer,
    reinitialize,
    reproduce,
    run,
    run_ercot,
    run_time_step,
)
from ercot.generators import make_dataset
from ercot.genome import decode, refine_population, transform_population
from ercot.nsga import Population, environmental_selection

SMALL = EngineConfig(pop=12, c_max=6, budget=60, seed=3, cv_folds=50)


def toy(horizon: int = 3, n: int = 30, shift: float = 0.3, seed: int = 0) -> TemporalDataset:
    """Three well separated blobs drifting slowly to the right."""
    rng = np.random.default_rng(seed)
    centres = np.array([[0.0, 0.0], [8.0, 0.0], [4.0, 7.0]])
    y = np.repeat(np.arange(3), n // 3)
    base = centres[y] + rng.normal(scale=0.7, size=(y.size, 2))
    snaps = [
        Snapshot(t, np.arange(y.size), base + [shift * t, 0.0] + rng.normal(scale=0.1, size=base.shape), y)
        for t in range(1, horizon + 1)
    ]
    return TemporalDataset(tuple(snaps), "toy")


def first_steps(name: str, k: int) -> TemporalDataset:
    data = make_dataset(name, 0)
    return TemporalDataset(data.snapshots[:k], data.name)


# --- configuration -----------------------------------------------------------


def test_defaults_and_generations():
    cfg = EngineConfig()
    assert (cfg.pop, cfg.c_max, cfg.budget, cfg.reinit_p) == (100, 8, 1000, 0.8)
    assert (cfg.cx_rate, cfg.mut_rate, cfg.mut_eta, cfg.cv_folds) == (0.9, 0.9, 20.0, 500)
    assert cfg.generations == 9
    assert EngineConfig(pop=10, budget=20).generations == 1


@pytest.mark.parametrize(
    "kwargs", [{"pop": 3}, {"c_max": 1}, {"budget": 150}, {"reinit_p": 1.2}, {"reinit_p": -0.1}, {"cv_folds": 1}]
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        EngineConfig(**kwargs)


def test_unknown_mode():
    data = toy(1)
    with pytest.raises(ValueError):
        run_time_step(1, data[0], None, SMALL, np.random.default_rng(0), "greedy")


# --- individual steps --------------------------------------------------------


def test_initialize_produces_finite_population():
    s = toy(1)[0]
    P, evals = initialize(s, SMALL, np.random.default_rng(0))
    assert len(P) == SMALL.pop and evals == SMALL.pop
    assert np.all(np.isfinite(P.F)) and not P.accumulated
    assert np.all((P.genomes[:, : SMALL.c_max] >= 0.5).sum(axis=1) >= 2)


def test_reinitialize_split_matches_transform_oracle():
    data = toy(2)
    cfg = EngineConfig(pop=20, c_max=6, budget=40, reinit_p=0.8, seed=0)
    P, _ = initialize(data[0], cfg, np.random.default_rng(1))
    rng, probe = np.random.default_rng(7), np.random.default_rng(7)
    Q, evals = reinitialize(P, data[0], data[1], cfg, rng)
    assert len(Q) == 20 and evals == 20
    idx = np.sort(probe.choice(len(P), size=16, replace=False))
    expected = transform_population(P.genomes[idx], data[0], data[1], cfg.c_max, probe)
    np.testing.assert_array_equal(Q.genomes[:16], expected)
    assert not np.array_equal(Q.genomes[16:], P.genomes[:4])


def test_reinitialize_extremes():
    data = toy(2)
    P, _ = initialize(data[0], SMALL, np.random.default_rng(1))
    none = EngineConfig(pop=12, c_max=6, budget=60, reinit_p=0.0)
    rng, probe = np.random.default_rng(2), np.random.default_rng(2)
    Q, _ = reinitialize(P, data[0], data[1], none, rng)
    fresh, _ = initialize(data[1], none, probe)
    np.testing.assert_array_equal(Q.genomes, fresh.genomes)


def test_reinitialize_without_common_samples_starts_fresh():
    a = Snapshot(1, np.arange(10), np.random.default_rng(0).normal(size=(10, 2)))
    b = Snapshot(2, np.arange(10, 20), np.random.default_rng(1).normal(size=(10, 2)))
    P, _ = initialize(a, SMALL, np.random.default_rng(0))
    Q, _ = reinitialize(P, a, b, SMALL, np.random.default_rng(3))
    probe = np.random.default_rng(3)
    probe.choice(len(P), size=9, replace=False)  # survivors are drawn before the transform fails
    fresh, _ = initialize(b, SMALL, probe)
    np.testing.assert_array_equal(Q.genomes, fresh.genomes)


def test_reproduce_without_variation_copies_refined_parents():
    s = toy(1)[0]
    rng = np.random.default_rng(4)
    P, _ = initialize(s, SMALL, rng)
    lo, hi = s.bounds()
    G = P.genomes
    for _ in range(50):  # iterate refinement to a fixed point
        G = refine_population(G, s.X, SMALL.c_max, lo, hi, rng)
    fixed = Population(G, P.F, SMALL.c_max)
    cfg = EngineConfig(pop=12, c_max=6, budget=60, cx_rate=0.0, mut_rate=0.0)
    Q, n = reproduce(fixed, s, cfg, rng)
    assert n == 12
    for row in Q.genomes:
        assert any(np.allclose(row, g, rtol=0, atol=1e-12) for g in G)


def test_selection_never_loses_best_compactness():
    s = toy(1)[0]
    rng = np.random.default_rng(5)
    P, _ = initialize(s, SMALL, rng)
    best = P.F[:, 0].min()
    for _ in range(6):
        Q, _ = reproduce(P, s, SMALL, rng)
        P = environmental_selection(P, Q, SMALL.pop)
        assert P.F[:, 0].min() <= best
        best = P.F[:, 0].min()


def test_penalty_objective_is_one_minus_nmi():
    data = toy(2)
    prev = decode(initialize(data[0], SMALL, np.random.default_rng(0))[0].genomes[0], data[0], SMALL.c_max)
    P, _ = initialize(data[1], SMALL, np.random.default_rng(1))
    F = penalty_scorer(data[1], prev, SMALL.c_max)(P.genomes)
    assert np.all((F[:, 1] >= 0) & (F[:, 1] <= 1))
    same = penalty_scorer(data[0], prev, SMALL.c_max)(P.genomes[:0])
    assert same.shape == (0, 2)


# --- whole runs --------------------------------------------------------------


def test_budget_accounting():
    data = toy(3)
    cfg = EngineConfig(pop=10, c_max=6, budget=100, seed=0, cv_folds=50)
    res = run_ercot(data, cfg)
    assert res.evaluations[0] == 100
    for e in res.evaluations[1:]:
        assert 100 <= e <= 100 + 2 * cfg.pop
    assert run(data, cfg, "static").evaluations == [100, 100, 100]


def test_run_is_deterministic_and_complete():
    data = toy(4)
    a, b = run_ercot(data, SMALL), run_ercot(data, SMALL)
    assert a.times == [1, 2, 3, 4]
    assert a.alphas[0] is None and a.weights[0] is None
    assert all(0.0 <= x <= 1.0 for x in a.alphas[1:])
    assert a.alphas == b.alphas and a.n_clusters == b.n_clusters
    for p, q in zip(a.partitions, b.partitions):
        np.testing.assert_array_equal(p.labels, q.labels)
    assert a.scores == b.scores and a.scores.mRI > 0.9


def test_modes_agree_on_first_step():
    data = toy(2)
    runs = [run_ercot(data, SMALL), run_static_ec(data, SMALL), run_penalty_ec(data, SMALL)]
    assert [r.algorithm for r in runs] == ["ercot", "static", "penalty"]
    for r in runs[1:]:
        np.testing.assert_array_equal(r.partitions[0].labels, runs[0].partitions[0].labels)
        assert all(a is None for a in r.alphas)


def test_single_snapshot_runs_coincide():
    data = toy(1)
    a, b = run_ercot(data, SMALL), run_static_ec(data, SMALL)
    np.testing.assert_array_equal(a.partitions[0].labels, b.partitions[0].labels)
    assert a.scores == b.scores


def test_unlabelled_data_is_not_scored():
    rng = np.random.default_rng(0)
    data = TemporalDataset(tuple(Snapshot(t, np.arange(20), rng.normal(size=(20, 2))) for t in (1, 2)), "u")
    res = run_ercot(data, SMALL)
    assert res.scores is None and len(res.partitions) == 2


@pytest.mark.slow
def test_ercot_tracks_syn1_prefix():
    res = run_ercot(first_steps("syn1", 3), EngineConfig(seed=0))
    assert len(res.alphas) == 3 and res.scores.mRI > 0.85
