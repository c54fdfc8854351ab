"""Hitting-set recovery of the source neighbourhood.

Each sample contributes the set of sensors that reported an alarm. A
minimum hitting set of those sets estimates the true neighbourhood, and
the centroid of its members estimates the source location.

Solvers accept any collection of sets of integer labels. The exact solver
breaks ties between equal-size solutions by a label precedence order, plain
label order unless told otherwise; the estimator ranks labels by how often
they alarmed.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .base import (EmptyCollectionError, LocalizerMixin, SolverBudgetError, check_dataset,
                   check_positions)

DEFAULT_NODE_BUDGET = 10**7
#: ``solver="auto"`` uses the exact search only below these instance sizes
EXACT_MAX_SENSORS = 64
EXACT_MAX_SUBSETS = 5000


@dataclass
class NeighborhoodCollection:
    subsets: list
    n_dropped: int = 0
    sample_index: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __len__(self):
        return len(self.subsets)

    def __iter__(self):
        return iter(self.subsets)


@dataclass(frozen=True)
class HittingSet:
    members: tuple
    optimal: bool

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def build_collection(X):
    """One subset of alarmed column indices per non-empty sample, in sample order."""
    X = check_dataset(X)
    keep = np.flatnonzero(X.any(axis=1))
    if len(keep) == 0:
        raise EmptyCollectionError(f"all {X.shape[0]} samples are empty")
    subsets = [frozenset(np.flatnonzero(X[t]).tolist()) for t in keep]
    return NeighborhoodCollection(subsets, X.shape[0] - len(keep), keep)


def _as_subsets(collection):
    subsets = [frozenset(s) for s in collection]
    if not subsets:
        raise EmptyCollectionError("the collection has no subsets")
    if any(len(s) == 0 for s in subsets):
        raise ValueError("an empty subset can never be hit")
    return subsets


def is_hitting_set(members, collection):
    members = set(members)
    return all(members & set(s) for s in collection)


def is_minimal(members, collection):
    """True when ``members`` hits everything but loses that after any single removal."""
    members = set(members)
    if not is_hitting_set(members, collection):
        return False
    return all(not is_hitting_set(members - {m}, collection) for m in members)


# --- greedy minimal ------------------------------------------------------------

def minimal_hitting_set(collection):
    """Greedy cover followed by a pruning pass; the result is minimal.

    Greedy step picks the label hitting the most still-unhit subsets (lowest
    label on ties). The pruning pass drops redundant members, highest label
    first.
    """
    subsets = _as_subsets(collection)
    labels = sorted(set().union(*subsets))
    col = {lab: j for j, lab in enumerate(labels)}
    incidence = np.zeros((len(subsets), len(labels)), dtype=bool)
    for i, s in enumerate(subsets):
        incidence[i, [col[v] for v in s]] = True

    chosen = []
    unhit = np.ones(len(subsets), dtype=bool)
    while unhit.any():
        j = int(np.argmax(incidence[unhit].sum(axis=0)))
        chosen.append(j)
        unhit &= ~incidence[:, j]

    hits = incidence[:, chosen].sum(axis=1)
    for j in sorted(chosen, reverse=True):
        if np.all(hits - incidence[:, j] > 0):
            hits -= incidence[:, j]
            chosen.remove(j)
    return HittingSet(tuple(sorted(labels[j] for j in chosen)), optimal=False)


# --- exact minimum -------------------------------------------------------------

def _reduce(masks):
    """Drop duplicates and supersets; a subset's supersets are hit whenever it is."""
    kept = []
    for m in sorted(set(masks), key=lambda v: (v.bit_count(), v)):
        if not any(k & m == k for k in kept):
            kept.append(m)
    return kept


def _packing_bound(masks, allowed):
    """Size of a greedy family of pairwise-disjoint sets, restricted to ``allowed``."""
    used = 0
    count = 0
    for m in sorted((m & allowed for m in masks), key=int.bit_count):
        if not m & used:
            used |= m
            count += 1
    return count


class _Search:
    def __init__(self, n_labels, budget):
        self.full = (1 << n_labels) - 1
        self.budget = budget
        self.nodes = 0

    def first_of_size(self, masks, k):
        """First hitting set of exactly ``k`` labels in rank order, or None.

        Bit ``j`` is the label of rank ``j``. Ranks are decided in increasing
        order, include before exclude, so the first success is the smallest
        sequence of ranks.
        """
        return self._dfs(masks, 0, 0, k)

    def _dfs(self, unhit, start, chosen, slots):
        self.nodes += 1
        if self.nodes > self.budget:
            raise _BudgetExceeded
        if not unhit:
            return chosen
        if slots == 0:
            return None
        allowed = self.full & ~((1 << start) - 1)
        union = 0
        for m in unhit:
            if not m & allowed:
                return None
            union |= m
        if _packing_bound(unhit, allowed) > slots:
            return None
        candidates = union & allowed
        # a minimum hitting set only contains labels that hit something
        i = (candidates & -candidates).bit_length() - 1
        bit = 1 << i
        found = self._dfs([m for m in unhit if not m & bit], i + 1, chosen | bit, slots - 1)
        if found is not None:
            return found
        return self._dfs(unhit, i + 1, chosen, slots)


class _BudgetExceeded(Exception):
    pass


def _ranked_labels(subsets, order):
    labels = set().union(*subsets)
    if order is None:
        return sorted(labels)
    ranked = [lab for lab in order if lab in labels]
    if len(set(ranked)) != len(labels):
        raise ValueError("order must list every label of the collection exactly once")
    return ranked


def frequency_order(collection):
    """Labels by how many subsets contain them (most first), ties by label."""
    freq = {}
    for s in collection:
        for v in s:
            freq[v] = freq.get(v, 0) + 1
    return sorted(freq, key=lambda v: (-freq[v], v))


def minimum_hitting_set(collection, node_budget=DEFAULT_NODE_BUDGET, order=None):
    """Exact minimum-cardinality hitting set by branch and bound.

    Cardinalities are tried in increasing order starting from a disjoint
    packing lower bound. Among equal-size solutions the one that comes first
    in ``order`` wins, compared as sequences ranked by ``order`` (default:
    plain lexicographic order of the labels). Raises
    :class:`SolverBudgetError` (carrying the greedy solution) if more than
    ``node_budget`` nodes are expanded.
    """
    subsets = _as_subsets(collection)
    labels = _ranked_labels(subsets, order)
    col = {lab: j for j, lab in enumerate(labels)}
    masks = _reduce([sum(1 << col[v] for v in s) for s in subsets])

    greedy = minimal_hitting_set(subsets)
    search = _Search(len(labels), node_budget)
    lower = _packing_bound(masks, search.full)
    try:
        for k in range(max(lower, 1), len(greedy) + 1):
            found = search.first_of_size(masks, k)
            if found is not None:
                members = sorted(labels[j] for j in range(len(labels)) if found >> j & 1)
                return HittingSet(tuple(members), optimal=True)
    except _BudgetExceeded:
        raise SolverBudgetError(
            f"exact search exceeded {node_budget} nodes", incumbent=greedy) from None
    # greedy size is always attainable, so the loop returns before this
    raise AssertionError("branch and bound failed to reach the greedy bound")


def solve(collection, solver="auto", node_budget=DEFAULT_NODE_BUDGET, order=None):
    """Dispatch to the exact or greedy solver.

    ``"auto"`` picks the exact search for small instances. An exact search
    that runs out of budget falls back to the greedy answer with a warning;
    the returned set then has ``optimal=False``. ``order`` is the exact
    solver's tie-break precedence.
    """
    subsets = _as_subsets(collection)
    if solver == "auto":
        n_labels = len(set().union(*subsets))
        exact = n_labels <= EXACT_MAX_SENSORS and len(subsets) <= EXACT_MAX_SUBSETS
        solver = "exact" if exact else "greedy"
    if solver == "greedy":
        return minimal_hitting_set(subsets)
    if solver != "exact":
        raise ValueError(f"unknown solver {solver!r}; use 'exact', 'greedy' or 'auto'")
    try:
        return minimum_hitting_set(subsets, node_budget, order)
    except SolverBudgetError as err:
        warnings.warn(f"{err}; using the greedy minimal hitting set", RuntimeWarning)
        return err.incumbent


def hs_estimate(collection, positions, solver="auto", node_budget=DEFAULT_NODE_BUDGET,
                tie_break="frequency"):
    """Centroid of the positions of the hitting-set members.

    ``tie_break="frequency"`` prefers, among minimum hitting sets, members
    that alarmed in more samples; ``"index"`` prefers lower column indices.
    """
    if tie_break == "frequency":
        order = frequency_order(collection)
    elif tie_break == "index":
        order = None
    else:
        raise ValueError(f"unknown tie_break {tie_break!r}; use 'frequency' or 'index'")
    hs = solve(collection, solver, node_budget, order)
    return np.asarray(positions, dtype=float)[list(hs.members)].mean(axis=0), hs


# --- sample complexity ---------------------------------------------------------

def _ceil_count(x):
    # exact integers such as ln(0.01)/ln(0.1) come out a few ulps high
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return max(1, int(r))
    return max(1, math.ceil(x))


def multi_sample_bound(delta, k, d, p_f):
    """Samples needed to recover the neighbourhoods of ``k`` sources of degree ``d``
    with probability at least ``1 - delta``."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if int(k) < 1 or int(d) < 1:
        raise ValueError("k and d must be at least 1")
    if not 0 <= p_f < 1:
        raise ValueError(f"p_f must lie in [0, 1), got {p_f}")
    if p_f == 0:
        return 1
    return _ceil_count((math.log(delta) - math.log(int(k) * int(d))) / math.log(p_f))


def sample_bound(delta, d, p_f):
    return multi_sample_bound(delta, 1, d, p_f)


# --- estimator -----------------------------------------------------------------

class HittingSetLocalizer(LocalizerMixin, BaseEstimator):
    """Source location as the centroid of a hitting set of the per-sample alarm sets.

    Fitted attributes: ``hitting_set_`` (column indices), ``optimal_``,
    ``n_dropped_`` (all-zero samples ignored) and ``location_``.
    """

    def __init__(self, sensor_positions=None, solver="auto", node_budget=DEFAULT_NODE_BUDGET,
                 tie_break="frequency"):
        self.sensor_positions = sensor_positions
        self.solver = solver
        self.node_budget = node_budget
        self.tie_break = tie_break

    def fit(self, X, y=None):
        pos = check_positions(self.sensor_positions)
        X = check_dataset(X, len(pos))
        collection = build_collection(X)
        self.location_, hs = hs_estimate(collection, pos, self.solver, self.node_budget,
                                         self.tie_break)
        self.hitting_set_ = np.array(hs.members, dtype=int)
        self.optimal_ = hs.optimal
        self.n_dropped_ = collection.n_dropped
        return self
