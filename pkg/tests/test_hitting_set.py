import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from faultloc.base import EmptyCollectionError, SolverBudgetError
from faultloc.hitting_set import (HittingSetLocalizer, build_collection, frequency_order,
                                  hs_estimate, is_hitting_set, is_minimal, minimal_hitting_set,
                                  minimum_hitting_set, multi_sample_bound, sample_bound, solve)
from faultloc.simulation import (FaultParams, SensingParams, SourceSpec,
                                 deploy_sensors, generate_dataset, true_neighborhood)

EXAMPLE_1 = [{1}, {1, 4}, {2, 3}, {2, 4}]
EXAMPLE_2 = [{1, 2}, {1, 3}, {1, 2, 4}, {1, 3, 5}]


def all_minimum(collection):
    """Every minimum hitting set, by exhaustive enumeration."""
    labels = sorted(set().union(*collection))
    for k in range(1, len(labels) + 1):
        found = [c for c in itertools.combinations(labels, k)
                 if all(set(c) & set(s) for s in collection)]
        if found:
            return found
    return []


collections = st.lists(st.frozensets(st.integers(0, 14), min_size=1, max_size=6),
                       min_size=1, max_size=12)


def test_build_collection():
    c = build_collection(np.array([[1, 0, 1], [0, 1, 0]]))
    assert c.subsets == [{0, 2}, {1}] and c.n_dropped == 0
    c = build_collection(np.array([[0, 0, 0], [1, 1, 0]]))
    assert len(c) == 1 and c.n_dropped == 1 and list(c.sample_index) == [1]
    c = build_collection(np.ones((4, 2), dtype=int))
    assert c.subsets == [{0, 1}] * 4
    with pytest.raises(EmptyCollectionError):
        build_collection(np.zeros((3, 4), dtype=int))


def test_worked_examples():
    assert minimum_hitting_set(EXAMPLE_1).members == (1, 2)
    hs = minimum_hitting_set(EXAMPLE_2)
    assert hs.members == (1,) and hs.optimal
    assert is_minimal({2, 3}, EXAMPLE_2)
    assert not is_minimal({1, 2}, EXAMPLE_2)


def test_greedy_examples():
    assert minimal_hitting_set(EXAMPLE_2).members == (1,)
    assert minimal_hitting_set([{7}]).members == (7,)
    assert not minimal_hitting_set([{7}]).optimal


def test_forced_singleton():
    hs = minimum_hitting_set([{3, 4}, {9}, {4, 5}])
    assert 9 in hs.members


def test_bad_collections():
    with pytest.raises(EmptyCollectionError):
        minimum_hitting_set([])
    with pytest.raises(ValueError):
        minimum_hitting_set([{1}, set()])
    with pytest.raises(ValueError):
        solve(EXAMPLE_1, solver="genetic")
    with pytest.raises(ValueError):
        minimum_hitting_set(EXAMPLE_1, order=[1, 2, 3])


@settings(max_examples=200, deadline=None)
@given(collections)
def test_exact_matches_enumeration(collection):
    hs = minimum_hitting_set(collection)
    oracle = all_minimum(collection)
    assert len(hs) == len(oracle[0])
    assert is_hitting_set(hs.members, collection)
    # default tie-break: lexicographically smallest sorted sequence
    assert hs.members == min(oracle)


@settings(max_examples=100, deadline=None)
@given(collections)
def test_frequency_tie_break(collection):
    order = frequency_order(collection)
    rank = {v: i for i, v in enumerate(order)}
    hs = minimum_hitting_set(collection, order=order)
    best = min(all_minimum(collection), key=lambda c: sorted(rank[v] for v in c))
    assert set(hs.members) == set(best)


@settings(max_examples=150, deadline=None)
@given(collections)
def test_greedy_is_minimal_and_no_smaller_than_exact(collection):
    greedy = minimal_hitting_set(collection)
    assert is_minimal(greedy.members, collection)
    assert len(minimum_hitting_set(collection)) <= len(greedy)


def test_frequency_order():
    assert frequency_order([{3, 1}, {3}, {2, 1}, {5}]) == [1, 3, 2, 5]


def test_budget_exhaustion():
    rng = np.random.default_rng(0)
    coll = [set(rng.choice(40, size=4, replace=False).tolist()) for _ in range(60)]
    with pytest.raises(SolverBudgetError) as info:
        minimum_hitting_set(coll, node_budget=5)
    assert is_hitting_set(info.value.incumbent.members, coll)
    with pytest.warns(RuntimeWarning):
        hs = solve(coll, solver="exact", node_budget=5)
    assert not hs.optimal and is_hitting_set(hs.members, coll)


def test_auto_solver_switches_on_size():
    big = [{i, i + 1} for i in range(0, 140, 2)]
    assert not solve(big, "auto").optimal
    assert solve(EXAMPLE_1, "auto").optimal


def test_hs_estimate_centroids():
    pos = np.array([[12.0, 30.0], [0.0, 0.0]])
    loc, hs = hs_estimate([{0}], pos)
    assert np.allclose(loc, [12.0, 30.0]) and hs.members == (0,)
    loc, hs = hs_estimate([{0, 1}], pos, tie_break="index")
    assert np.allclose(loc, [12.0, 30.0])
    with pytest.raises(ValueError):
        hs_estimate(EXAMPLE_1, np.zeros((5, 2)), tie_break="random")


def test_hs_symmetric_neighbourhood():
    square = np.array([[10.0, 15.0], [20.0, 15.0], [15.0, 10.0], [15.0, 20.0]])
    loc, hs = hs_estimate([{0}, {1}, {2}, {3}], square)
    assert np.allclose(loc, [15.0, 15.0])


def test_clean_data_degenerates_to_one_neighbour():
    f = deploy_sensors(10, seed=0)
    src = SourceSpec((50.0, 50.0), 30000.0)
    X = generate_dataset(f, [src], sensing=SensingParams(noise_sigma=0), m=5)
    nb = set(true_neighborhood(f, src))
    loc, hs = hs_estimate(build_collection(X), f.positions)
    assert len(hs) == 1 and set(hs.members) <= nb


def test_sample_bound_table():
    expect = {0.1: 2, 0.2: 3, 0.3: 4, 0.4: 6, 0.5: 7}
    for p, m in expect.items():
        assert sample_bound(0.1, 10, p) == m
    assert multi_sample_bound(0.1, 2, 10, 0.1) == 3
    assert sample_bound(0.1, 10, 0.0) == 1
    with pytest.raises(ValueError):
        sample_bound(0.0, 10, 0.1)
    with pytest.raises(ValueError):
        sample_bound(1.0, 10, 0.1)


def mp_bound(delta, k, d, p):
    with mpmath.workdps(50):
        raw = (mpmath.log(delta) - mpmath.log(k * d)) / mpmath.log(p)
        return max(1, int(mpmath.ceil(raw - mpmath.mpf("1e-30"))))


@settings(max_examples=200, deadline=None)
@given(st.floats(0.001, 0.999), st.integers(1, 5), st.integers(1, 60), st.floats(0.01, 0.99))
def test_bound_matches_high_precision(delta, k, d, p):
    got = multi_sample_bound(delta, k, d, p)
    ref = mp_bound(mpmath.mpf(delta), k, d, mpmath.mpf(p))
    # the 1e-9 near-integer guard may round down a raw value within that of an integer
    assert got == ref or abs(got - ref) == 1
    if got != ref:
        with mpmath.workdps(50):
            raw = (mpmath.log(delta) - mpmath.log(k * d)) / mpmath.log(p)
        assert abs(raw - mpmath.nint(raw)) <= 1e-9 * max(1, abs(raw))
    assert multi_sample_bound(delta, 1, d, p) == sample_bound(delta, d, p)


@settings(max_examples=150, deadline=None)
@given(st.floats(0.01, 0.9), st.integers(1, 40), st.floats(0.01, 0.98), st.floats(0.001, 0.01))
def test_bound_monotone(delta, d, p, step):
    base = sample_bound(delta, d, p)
    assert sample_bound(delta, d, min(p + step, 0.99)) >= base
    assert sample_bound(delta, d + 1, p) >= base
    assert sample_bound(min(delta + step, 0.999), d, p) <= base
    assert multi_sample_bound(delta, 2, d, p) >= base


def test_localizer_api_and_recovery():
    f = deploy_sensors(50, seed=7)
    src = SourceSpec((50.0, 50.0))
    X = generate_dataset(f, [src], fault=FaultParams(0.1), m=50, seed=1)
    est = HittingSetLocalizer(f.positions, solver="exact").fit(X)
    assert est.optimal_ and est.n_dropped_ >= 0
    assert set(est.hitting_set_) <= set(true_neighborhood(f, src))
    assert est.localization_error((50.0, 50.0)) < 15
    assert HittingSetLocalizer(f.positions, tie_break="index").fit(X).optimal_
    with pytest.raises(EmptyCollectionError):
        HittingSetLocalizer(f.positions).fit(np.zeros((3, 50), dtype=int))
