import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ercot import kernels
from ercot.data import Snapshot
from ercot.genome import (
    Genome,
    Partition,
    TransformImpossible,
    active_centroids,
    assign_memberships,
    layout,
    random_genome,
    random_genomes,
    recompute_centroids,
    refine_population,
    repair,
    repair_population,
    transform_centroids,
    transform_population,
)
from ercot.generators import make_dataset

BOX = (np.array([-10.0, -10.0]), np.array([10.0, 10.0]))


def genome(masks, centroids, bounds=BOX) -> Genome:
    return Genome(np.asarray(masks, dtype=float), np.asarray(centroids, dtype=float), bounds)


def brute_nearest(g: Genome, X: np.ndarray) -> np.ndarray:
    out = []
    for x in X:
        best, best_d = -1, np.inf
        for c in range(g.c_max):
            if g.masks[c] < 0.5:
                continue
            d = np.sqrt(sum((x[k] - g.centroids[c, k]) ** 2 for k in range(X.shape[1])))
            if d < best_d:
                best, best_d = c, d
        out.append(best)
    return np.array(out)


def test_layout_matches_worked_example():
    assert layout(4, 3) == 16
    g = genome([0.8, 0.3, 0.6, 0.1], np.zeros((4, 3)), (np.zeros(3), np.ones(3)))
    assert len(g) == 16 and g.to_vector().size == 16


def test_active_centroids_worked_example():
    cents = [[0.7, 0.2, 0.6], [0.5, 0.5, 0.5], [0.1, 0.8, 0.2], [0.9, 0.9, 0.9]]
    g = genome([0.7, 0.2, 0.9, 0.4], cents, (np.zeros(3), np.ones(3)))
    act = active_centroids(g)
    assert [c for c, _ in act] == [0, 2]
    np.testing.assert_array_equal(act[0][1], [0.7, 0.2, 0.6])
    np.testing.assert_array_equal(act[1][1], [0.1, 0.8, 0.2])


def test_active_threshold_is_inclusive():
    g = genome([0.5, 0.49999, 1.0], np.zeros((3, 2)))
    assert g.active.tolist() == [0, 2]
    assert genome([1.0] * 5, np.zeros((5, 2))).active.tolist() == [0, 1, 2, 3, 4]


def test_vector_round_trip():
    rng = np.random.default_rng(0)
    g = random_genome(5, BOX, rng)
    back = Genome.from_vector(g.to_vector(), 5, BOX)
    np.testing.assert_array_equal(back.masks, g.masks)
    np.testing.assert_array_equal(back.centroids, g.centroids)
    with pytest.raises(ValueError):
        Genome.from_vector(np.zeros(7), 3, BOX)


def test_random_genomes_respect_bounds_and_activity():
    rng = np.random.default_rng(1)
    lo, hi = np.array([0.0, -1.0, 5.0]), np.array([1.0, 1.0, 6.0])
    G = random_genomes(10_000, 6, lo, hi, rng)
    masks, cents = G[:, :6], G[:, 6:].reshape(-1, 6, 3)
    assert np.all((masks >= 0) & (masks <= 1))
    assert np.all((cents >= lo) & (cents <= hi))
    assert (masks >= 0.5).sum(axis=1).min() >= 2


def test_degenerate_bounds_pin_centroids():
    g = random_genome(4, (np.array([1.5, -2.0]), np.array([1.5, -2.0])), np.random.default_rng(0))
    assert np.all(g.centroids == [1.5, -2.0])
    with pytest.raises(ValueError):
        random_genome(1, BOX, np.random.default_rng(0))


def test_repair_raises_exactly_two_largest():
    g = genome([0.4, 0.4, 0.4, 0.4], np.zeros((4, 2)))
    out = repair(g, np.random.default_rng(0))
    assert out.active.size == 2
    assert np.all(out.masks[out.active] >= 0.5) and np.all(out.masks[out.active] <= 1.0)
    g = genome([0.1, 0.45, 0.3, 0.44], np.zeros((4, 2)))
    assert repair(g, np.random.default_rng(0)).active.tolist() == [1, 3]


def test_repair_leaves_valid_genome_alone():
    g = genome([0.9, 0.1, 0.7], np.ones((3, 2)))
    out = repair(g, np.random.default_rng(0))
    np.testing.assert_array_equal(out.to_vector(), g.to_vector())


@settings(max_examples=1000, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_repair_guarantee(c_max, seed):
    rng = np.random.default_rng(seed)
    G = rng.random((3, layout(c_max, 2)))
    G[:, :c_max] *= rng.random()  # often leaves fewer than two active
    out = repair_population(G.copy(), c_max, *BOX, rng)
    assert np.all((out[:, :c_max] >= 0.5).sum(axis=1) >= 2)
    assert np.all(out[:, :c_max] <= 1.0)
    ok = (G[:, :c_max] >= 0.5).sum(axis=1) >= 2
    np.testing.assert_array_equal(out[ok], G[ok])
    np.testing.assert_array_equal(out[:, c_max:], G[:, c_max:])


def test_assignment_examples():
    g = genome([1, 1], [[0, 0], [10, 10]])
    s = Snapshot(1, [0, 1], [[1.0, 1.0], [5.0, 5.0]])
    p = assign_memberships(g, s)
    assert p.labels.tolist() == [0, 0]  # second sample is equidistant: lower index wins
    g = genome([1, 1, 1], [[5, 5], [0, 0], [0, 0]])
    assert assign_memberships(g, Snapshot(1, [0], [[0.0, 0.0]])).labels.tolist() == [1]


def test_assignment_repairs_first():
    g = genome([0.1, 0.2, 0.0], [[0, 0], [1, 1], [2, 2]])
    p = assign_memberships(g, Snapshot(1, [0, 1], [[0.0, 0.0], [2.0, 2.0]]), np.random.default_rng(0))
    assert set(p.active) == {0, 1}


@pytest.mark.parametrize("seed", range(10))
def test_assignment_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3))
    bounds = (X.min(axis=0), X.max(axis=0))
    g = random_genome(6, bounds, rng)
    s = Snapshot(1, np.arange(50), X)
    np.testing.assert_array_equal(assign_memberships(g, s).labels, brute_nearest(g, X))


def test_recompute_examples():
    g = genome([1, 1], [[5, 5], [-5, -5]])
    s = Snapshot(1, [0, 1, 2], [[0.0, 0.0], [2.0, 2.0], [-5.0, -5.0]])
    p = Partition(s.ids, np.array([0, 0, 1]), (0, 1))
    out = recompute_centroids(g, p, s)
    np.testing.assert_allclose(out.centroids, [[1, 1], [-5, -5]])
    again = recompute_centroids(out, assign_memberships(out, s), s)
    np.testing.assert_array_equal(again.to_vector(), out.to_vector())


def test_recompute_deactivates_empty_clusters():
    g = genome([1, 1, 1], [[0, 0], [9, 9], [-9, -9]])
    s = Snapshot(1, [0, 1, 2], [[0.0, 0.0], [1.0, 0.0], [-9.0, -9.0]])
    out = recompute_centroids(g, assign_memberships(g, s), s)
    assert out.active.tolist() == [0, 2] and out.masks[1] == 0.0
    np.testing.assert_array_equal(out.centroids[1], [9, 9])


@pytest.mark.parametrize("seed", range(10))
def test_recompute_matches_mean_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 2))
    s = Snapshot(1, np.arange(60), X)
    g = genome(np.ones(4), rng.normal(size=(4, 2)), (X.min(axis=0), X.max(axis=0)))
    p = assign_memberships(g, s)
    out = recompute_centroids(g, p, s)
    for c in range(4):
        members = [X[i] for i in range(60) if p.labels[i] == c]
        if members:
            np.testing.assert_allclose(out.centroids[c], np.sum(members, axis=0) / len(members), rtol=1e-12)
        else:
            assert out.masks[c] == 0.0


def test_refine_population_is_idempotent_on_a_fixed_partition():
    d = make_dataset("syn1", 0)
    s = d[0]
    lo, hi = s.bounds()
    rng = np.random.default_rng(4)
    G = refine_population(random_genomes(20, 8, lo, hi, rng), s.X, 8, lo, hi, rng)
    for vec in G:
        g = Genome.from_vector(vec, 8, (lo, hi))
        p = assign_memberships(g, s)
        once = recompute_centroids(g, p, s)
        twice = recompute_centroids(once, p, s)
        np.testing.assert_array_equal(once.to_vector(), twice.to_vector())


def test_transform_identity_snaps_to_means():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 2))
    s = Snapshot(1, np.arange(40), X)
    g = genome(np.ones(3), rng.normal(size=(3, 2)), s.bounds())
    out = transform_centroids(g, s, s)
    ref = recompute_centroids(g, assign_memberships(g, s), s)
    np.testing.assert_allclose(out.to_vector(), ref.to_vector())


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-50, 50), st.floats(-50, 50))
def test_transform_translation_equivariance(seed, dx, dy):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 2)) * 3
    src = Snapshot(1, np.arange(30), X)
    shift = np.array([dx, dy])
    g = genome(np.array([1.0, 1.0, 1.0, 0.2]), X[rng.choice(30, 4, replace=False)], src.bounds())
    dst = Snapshot(2, np.arange(30), X + shift)
    a = transform_centroids(g, src, src)
    b = transform_centroids(g, src, dst)
    np.testing.assert_array_equal(a.masks, b.masks)
    act = a.active
    np.testing.assert_allclose(b.centroids[act], a.centroids[act] + shift, atol=1e-9)


def test_transform_translation_example():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(25, 2))
    src = Snapshot(1, np.arange(25), X)
    g = genome([1, 1], [[-1, 0], [1, 0]], src.bounds())
    a = transform_centroids(g, src, src)
    b = transform_centroids(g, src, Snapshot(2, np.arange(25), X + [5.0, 0.0]))
    np.testing.assert_allclose(b.centroids - a.centroids, [[5, 0], [5, 0]], atol=1e-12)


def test_transform_uses_common_samples_only():
    d = make_dataset("syn5", 1)
    src, dst = d[2], d[3]
    lo, hi = src.bounds()
    rng = np.random.default_rng(0)
    g = Genome.from_vector(random_genomes(1, 5, lo, hi, rng)[0], 5, (lo, hi))
    out = transform_centroids(g, src, dst, rng)
    ids = np.intersect1d(src.ids, dst.ids)
    assert ids.size == 160
    labels = brute_nearest(g, src.X[src.rows_of(ids)])
    Xd = dst.X[dst.rows_of(ids)]
    dlo, dhi = dst.bounds()
    for c in np.unique(labels):
        np.testing.assert_allclose(out.centroids[c], np.clip(Xd[labels == c].mean(axis=0), dlo, dhi), rtol=1e-12)


def test_transform_without_common_samples():
    a = Snapshot(1, [0, 1], [[0.0, 0.0], [1.0, 1.0]])
    b = Snapshot(2, [2, 3], [[0.0, 0.0], [1.0, 1.0]])
    g = genome([1, 1], [[0, 0], [1, 1]], a.bounds())
    with pytest.raises(TransformImpossible):
        transform_centroids(g, a, b)
    with pytest.raises(TransformImpossible):
        transform_population(g.to_vector()[None, :], a, b, 2, np.random.default_rng(0))


# --- compiled kernels against the numpy fallback -----------------------------

needs_ext = pytest.mark.skipif(not kernels.compiled_available(), reason="compiled kernels not built")


@needs_ext
@pytest.mark.parametrize("seed", range(20))
def test_backends_agree(seed):
    from ercot import _kernels, _kernels_py

    rng = np.random.default_rng(seed)
    c_max, dim = int(rng.integers(2, 9)), int(rng.integers(1, 5))
    X = rng.normal(size=(int(rng.integers(1, 80)), dim))
    Y = X + rng.normal(scale=0.1, size=X.shape)
    lo, hi = X.min(axis=0), X.max(axis=0)
    G = random_genomes(15, c_max, lo, hi, rng)
    G[0, :c_max] = 0.0  # no active centroid
    G[1, :c_max] = [1.0] + [0.0] * (c_max - 1)
    G[2, c_max : c_max + dim] = G[2, c_max + dim : c_max + 2 * dim]  # coincident pair
    G[2, :2] = 1.0
    for a, b in zip(_kernels.assign(G, X, c_max), _kernels_py.assign(G, X, c_max)):
        np.testing.assert_allclose(a, b, rtol=1e-12)
    np.testing.assert_allclose(_kernels.evaluate(G, X, c_max), _kernels_py.evaluate(G, X, c_max), rtol=1e-12)
    np.testing.assert_allclose(
        _kernels.encode(G, X, Y, c_max, lo, hi), _kernels_py.encode(G, X, Y, c_max, lo, hi), rtol=1e-12, atol=1e-15
    )
    F = np.round(rng.random((40, 2)), 1)
    np.testing.assert_array_equal(_kernels.pareto_ranks(F), _kernels_py.pareto_ranks(F))


def test_backend_switch_round_trip():
    before = kernels.BACKEND
    kernels.use_backend("python")
    assert kernels.BACKEND == "python"
    kernels.use_backend(before)
    assert kernels.BACKEND == before
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")
