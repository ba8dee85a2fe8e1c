import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from threadpoolctl import threadpool_limits

from conceptmine.errors import ValidationError
from conceptmine.kmeans import (KMeansConfig, _init_sample, assign_to_centroids,
                                data_scale, kmeans_fit, lloyd)

from dstools import make_ds, partition_of, rng_dataset


def test_two_far_pairs():
    ds = make_ds(np.array([[0.0], [1.0], [100.0], [101.0]], dtype=np.float32))
    a = kmeans_fit(ds, KMeansConfig(k=2, restarts=4, seed=0))
    assert partition_of(a.labels) == partition_of([0, 0, 1, 1])
    # each pair: two points at distance 1 -> 2 * (1/2)^2
    assert a.inertia == pytest.approx(2 * (2 * 0.25), rel=1e-6)


def test_k_equals_n():
    ds = rng_dataset(1, 12, 3)
    a = kmeans_fit(ds, KMeansConfig(k=12, restarts=2, seed=0))
    assert a.inertia == 0.0
    assert len(set(a.labels.tolist())) == 12


def test_k_one_inertia_is_sse_about_mean():
    ds = rng_dataset(2, 40, 5)
    a = kmeans_fit(ds, KMeansConfig(k=1, restarts=1, seed=0))
    x = ds.vectors.astype(np.float64)
    sse = float(((x - x.mean(axis=0)) ** 2).sum())
    assert a.inertia == pytest.approx(sse, rel=1e-9)
    assert set(a.labels.tolist()) == {0}


def test_k_bounds():
    ds = rng_dataset(3, 5, 2)
    with pytest.raises(ValidationError):
        kmeans_fit(ds, KMeansConfig(k=0, seed=0))
    with pytest.raises(ValidationError):
        kmeans_fit(ds, KMeansConfig(k=6, seed=0))


def test_assign_tie_goes_to_lowest_index():
    ds = make_ds(np.array([[5.0]], dtype=np.float32))
    cents = np.array([[9.0], [9.0], [4.0], [7.0], [8.0], [6.0]], dtype=np.float32)
    # point 5 is at distance 1 from centroids 2 (=4), 5 (=6); lowest wins
    labels = assign_to_centroids(ds, cents)
    assert labels.tolist() == [2]


def test_assign_centroids_equal_data():
    ds = rng_dataset(4, 9, 4)
    labels = assign_to_centroids(ds, ds.vectors)
    assert labels.tolist() == list(range(9))


def test_assign_1d_example():
    ds = make_ds(np.array([[0.0], [10.0]], dtype=np.float32))
    labels = assign_to_centroids(ds, np.array([[1.0], [9.0]], dtype=np.float32))
    assert labels.tolist() == [0, 1]


def test_assign_dim_mismatch():
    ds = rng_dataset(5, 4, 3)
    with pytest.raises(ValidationError):
        assign_to_centroids(ds, np.zeros((2, 5), dtype=np.float32))


def test_final_labels_are_nearest_to_final_centroids():
    ds = rng_dataset(6, 120, 6)
    a = kmeans_fit(ds, KMeansConfig(k=7, restarts=3, seed=11))
    # recompute means from labels, then re-assign: must be a fixpoint
    x = ds.vectors.astype(np.float64)
    cents = np.stack([x[a.labels == c].mean(axis=0) for c in range(a.k)])
    again = assign_to_centroids(ds, cents.astype(np.float32))
    ds32 = make_ds(cents.astype(np.float32))
    np.testing.assert_array_equal(a.labels, again)
    assert ds32.n_points == a.k


def test_best_of_restarts_bounds_each_single_run():
    ds = rng_dataset(7, 200, 8)
    cfg = KMeansConfig(k=6, restarts=8, seed=42)
    best = kmeans_fit(ds, cfg)
    Xd = ds.vectors.astype(np.float64)
    x_sqn = np.einsum("ij,ij->i", Xd, Xd)
    tol_abs = cfg.rel_tol * data_scale(ds.vectors)
    singles = []
    for ss in np.random.SeedSequence(42).spawn(8):
        rng = np.random.default_rng(ss)
        cents = _init_sample(rng, 200, cfg.k, Xd)
        singles.append(lloyd(Xd, x_sqn, cents, cfg.max_iter, tol_abs, cfg.chunk)[2])
    assert best.inertia == min(singles)
    for s in singles:
        assert best.inertia <= s


def test_determinism_and_thread_independence():
    ds = rng_dataset(8, 300, 16)
    cfg = KMeansConfig(k=10, restarts=2, seed=5)
    with threadpool_limits(limits=1):
        a1 = kmeans_fit(ds, cfg)
    with threadpool_limits(limits=2):
        a2 = kmeans_fit(ds, cfg)
    a3 = kmeans_fit(ds, cfg)
    np.testing.assert_array_equal(a1.labels, a2.labels)
    np.testing.assert_array_equal(a1.labels, a3.labels)
    assert a1.inertia == a2.inertia == a3.inertia


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([0.25, 0.5, 2.0, 4.0]))
def test_uniform_scaling_leaves_labels_unchanged(seed, c):
    ds = rng_dataset(seed, 80, 4)
    scaled = make_ds(ds.vectors * np.float32(c))
    cfg = KMeansConfig(k=5, restarts=2, seed=3)
    a = kmeans_fit(ds, cfg)
    b = kmeans_fit(scaled, cfg)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_plusplus_init_supported():
    ds = rng_dataset(9, 150, 6)
    a = kmeans_fit(ds, KMeansConfig(k=5, restarts=2, seed=1, init="plusplus"))
    b = kmeans_fit(ds, KMeansConfig(k=5, restarts=2, seed=1, init="sample"))
    assert a.k == b.k == 5
    assert a.inertia > 0 and b.inertia > 0


def test_restart_seeds_differ():
    # restarts explore: on multimodal data more restarts never hurt
    ds = rng_dataset(10, 250, 2)
    one = kmeans_fit(ds, KMeansConfig(k=8, restarts=1, seed=9))
    many = kmeans_fit(ds, KMeansConfig(k=8, restarts=10, seed=9))
    assert many.inertia <= one.inertia
