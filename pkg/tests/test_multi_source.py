import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from faultloc.feature_selection import FeatureSelectionLocalizer
from faultloc.hitting_set import HittingSetLocalizer
from faultloc.multi_source import (ClusterAssignment, MultiSourceLocalizer, _nearest,
                                   connection_distance, initial_clusters, iterative_localize,
                                   kmeans_clusters, match_error, per_cluster_localize)
from faultloc.simulation import (FaultParams, PropagationParams, SourceSpec, deploy_sensors,
                                 generate_dataset, place_source_pair, trial_seed)


def mp_connection(c1, c2, alpha, gamma):
    with mpmath.workdps(40):
        a = mpmath.mpf(alpha)
        root = mpmath.mpf(c1) ** (1 / (a + 1)) + mpmath.mpf(c2) ** (1 / (a + 1))
        return mpmath.mpf(gamma) ** (-1 / a) * root ** ((a + 1) / a)


def test_connection_distance_value():
    # 2**1.5 * sqrt(3000)
    assert connection_distance(3000, 3000) == pytest.approx(154.919334, abs=1e-6)
    assert connection_distance(3000, 3000) == pytest.approx(
        float(mp_connection(3000, 3000, 2, 1)), rel=1e-12)
    with pytest.raises(ValueError):
        connection_distance(0, 3000)


@settings(max_examples=100, deadline=None)
@given(st.floats(1, 1e4), st.floats(1, 1e4), st.floats(0.5, 5), st.floats(0.1, 10))
def test_connection_distance_high_precision(c1, c2, alpha, gamma):
    prop = PropagationParams(alpha, gamma)
    got = connection_distance(c1, c2, prop)
    assert got == pytest.approx(float(mp_connection(c1, c2, alpha, gamma)), rel=1e-9)
    assert got == pytest.approx(connection_distance(c2, c1, prop), rel=1e-12)
    assert connection_distance(c1 * 1.01, c2, prop) > got


def test_connection_distance_equal_sources():
    for alpha in (1.5, 2.0, 3.0):
        c = 700.0
        want = 2 ** ((alpha + 1) / alpha) * c ** (1 / alpha)
        assert connection_distance(c, c, PropagationParams(alpha)) == pytest.approx(want)


def test_kmeans_two_groups():
    rng = np.random.default_rng(0)
    a = rng.normal([10, 10], 1.0, size=(30, 2))
    b = rng.normal([90, 90], 1.0, size=(30, 2))
    pts = np.vstack([a, b])
    km = kmeans_clusters(pts, 2, seed=1)
    centers = sorted(map(tuple, km.centers))
    assert np.allclose(centers[0], a.mean(axis=0), atol=2)
    assert np.allclose(centers[1], b.mean(axis=0), atol=2)
    again = kmeans_clusters(pts, 2, seed=1)
    assert np.array_equal(km.labels, again.labels)


def test_kmeans_edge_cases():
    pts = np.random.default_rng(2).uniform(0, 100, size=(12, 2))
    one = kmeans_clusters(pts, 1, seed=0)
    assert np.allclose(one.centers[0], pts.mean(axis=0))
    zero = kmeans_clusters(pts, 3, seed=0, max_iters=0)
    assert zero.n_iter == 0 and len(zero.labels) == 12
    with pytest.raises(ValueError):
        kmeans_clusters(pts[:2], 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 6), st.integers(6, 40))
def test_kmeans_clusters_never_empty(seed, k, n):
    rng = np.random.default_rng(seed)
    pts = np.round(rng.uniform(0, 10, size=(n, 2)))  # duplicates on purpose
    km = kmeans_clusters(pts, k, seed=seed)
    assert set(km.labels.tolist()) == set(range(k))


def _two_source_data(d=80.0, p_f=0.1, seed=3, m=50):
    f = deploy_sensors(200, seed=trial_seed(seed, 0, "field"))
    srcs = place_source_pair(d, seed=trial_seed(seed, 0, "source"))
    X = generate_dataset(f, srcs, fault=FaultParams(p_f), m=m, seed=trial_seed(seed, 0, "noise"))
    return f, srcs, X


def test_per_cluster_reduction_to_single_source():
    f = deploy_sensors(100, seed=1)
    X = generate_dataset(f, [SourceSpec((40.0, 40.0))], fault=FaultParams(0.1), m=30, seed=2)
    all_cols = [np.arange(100)]
    fs = per_cluster_localize(X, f.positions, all_cols, "fs")
    assert np.array_equal(fs.locations[0], FeatureSelectionLocalizer(f.positions).fit(X).location_)
    hs = per_cluster_localize(X, f.positions, all_cols, "hs")
    assert np.array_equal(hs.locations[0], HittingSetLocalizer(f.positions).fit(X).location_)
    assert hs.iterations == 1 and not hs.converged
    single = MultiSourceLocalizer(f.positions, n_sources=1, random_state=0).fit(X)
    assert np.allclose(single.locations_[0], FeatureSelectionLocalizer(f.positions).fit(X).location_)


def test_per_cluster_clean_two_sources():
    f, srcs, X = _two_source_data(p_f=0.0)
    truth = np.array([s.location for s in srcs])
    labels = _nearest(f.positions, truth)
    clusters = ClusterAssignment(labels, truth)
    est = per_cluster_localize(X, f.positions, clusters, "fs")
    # fault-free but noisy: boundary sensors in the C and D bands pull the estimate
    # inward, so only ask that it lands inside the source's region of influence
    for j in range(2):
        assert np.hypot(*(est.locations[j] - truth[j])) < np.sqrt(600)
    swapped = per_cluster_localize(X, f.positions, clusters.members()[::-1], "fs")
    assert np.allclose(swapped.locations, est.locations[::-1])


def test_unlocalizable_cluster_falls_back():
    pos = np.array([[10.0, 10.0], [12.0, 10.0], [80.0, 80.0], [82.0, 80.0]])
    X = np.zeros((6, 4), dtype=int)
    X[:, :2] = 1
    est = per_cluster_localize(X, pos, [np.array([0, 1]), np.array([2, 3])], "fs")
    assert list(est.unlocalized) == [False, True]
    assert np.allclose(est.locations[1], [81.0, 80.0])
    est = per_cluster_localize(X, pos, [np.array([0, 1]), np.array([2, 3])], "hs",
                               fallback=np.array([[0.0, 0.0], [5.0, 5.0]]))
    assert np.allclose(est.locations[1], [5.0, 5.0])


def test_initial_clusters_cover_all_sensors():
    f, srcs, X = _two_source_data()
    a = initial_clusters(X, f.positions, 2, seed=0)
    assert len(a.labels) == 200 and a.k == 2
    assert np.array_equal(a.labels, _nearest(f.positions, a.centers))


def test_iterative_k1_and_zero_rounds():
    f = deploy_sensors(100, seed=1)
    X = generate_dataset(f, [SourceSpec((40.0, 40.0))], fault=FaultParams(0.1), m=30, seed=2)
    est = iterative_localize(X, f.positions, 1, "fs", seed=0)
    assert est.converged and est.iterations == 1
    assert np.array_equal(est.locations[0], FeatureSelectionLocalizer(f.positions).fit(X).location_)
    f2, _, X2 = _two_source_data()
    est = iterative_localize(X2, f2.positions, 2, "fs", seed=0, max_rounds=0)
    assert not est.converged and est.iterations == 0
    with pytest.raises(ValueError):
        iterative_localize(X2, f2.positions, 0)


def test_iterative_fixpoint_properties():
    f, srcs, X = _two_source_data()
    est = iterative_localize(X, f.positions, 2, "fs", seed=4, max_rounds=25)
    assert est.converged
    labels = _nearest(f.positions, est.locations)
    # every sensor sits with its nearest estimate, and re-localizing changes nothing
    members = [np.flatnonzero(labels == j) for j in range(2)]
    assert all(np.array_equal(a, b) for a, b in zip(members, est.clusters))
    again = per_cluster_localize(X, f.positions, members, "fs")
    assert np.allclose(again.locations, est.locations)


@pytest.mark.slow
def test_iterative_converges_on_separated_sources():
    hits = 0
    for b in range(100):
        f = deploy_sensors(200, seed=trial_seed(3, b, "field"))
        srcs = place_source_pair(80, seed=trial_seed(3, b, "source"))
        X = generate_dataset(f, srcs, fault=FaultParams(0.1), m=50, seed=trial_seed(3, b, "noise"))
        est = iterative_localize(X, f.positions, 2, "fs", seed=trial_seed(3, b, "cluster"),
                                 max_rounds=10)
        hits += est.converged
    assert hits >= 90


def test_match_error():
    truth = np.array([[0.0, 0.0], [10.0, 0.0]])
    assert match_error(truth[::-1], truth) == 0.0
    assert match_error([[3.0, 4.0], [10.0, 0.0]], truth) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        match_error(truth[:1], truth)


def test_estimator_api():
    f, srcs, X = _two_source_data()
    truth = np.array([s.location for s in srcs])
    for kw in ({"method": "fs"}, {"method": "hs"}, {"method": "fs", "iterative": True},
               {"method": "fs", "overlap_radius": 10.0}):
        est = MultiSourceLocalizer(f.positions, random_state=0, **kw).fit(X)
        assert est.locations_.shape == (2, 2)
        assert est.score(X, truth) == pytest.approx(-est.localization_error(truth))
    with pytest.raises(ValueError):
        MultiSourceLocalizer(f.positions, method="ml").fit(X)
