"""Localization of several sources by clustering sensors and solving each cluster alone."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .base import LocalizationError, check_dataset, check_positions
from .feature_selection import (DEFAULT_WEIGHTS, FeatureSelectionLocalizer, band_thresholds,
                                count_alarms)
from .hitting_set import DEFAULT_NODE_BUDGET, HittingSetLocalizer
from .simulation import PropagationParams, as_generator

METHODS = ("hs", "fs")


def connection_distance(c1, c2, prop=None):
    """Largest source separation at which the two regions of influence still touch."""
    prop = prop or PropagationParams()
    if not (c1 > 0 and c2 > 0):
        raise ValueError("emitted signals must be positive")
    a = prop.alpha
    root = c1 ** (1.0 / (a + 1.0)) + c2 ** (1.0 / (a + 1.0))
    return prop.gamma ** (-1.0 / a) * root ** ((a + 1.0) / a)


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    centers: np.ndarray
    n_iter: int = 0

    @property
    def k(self):
        return len(self.centers)

    def members(self):
        return [np.flatnonzero(self.labels == j) for j in range(self.k)]


@dataclass
class MultiEstimate:
    locations: np.ndarray
    iterations: int = 1
    converged: bool = False
    unlocalized: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    clusters: list = field(default_factory=list)


def _nearest(points, centers):
    d = np.hypot(points[:, None, 0] - centers[None, :, 0], points[:, None, 1] - centers[None, :, 1])
    return np.argmin(d, axis=1)


def kmeans_clusters(points, k, seed=None, max_iters=100):
    """Lloyd's algorithm seeded with ``k`` distinct points chosen uniformly.

    An empty cluster takes the point of the largest cluster that lies
    farthest from that cluster's centre.
    """
    points = check_positions(points)
    k = int(k)
    if k < 1 or len(points) < k:
        raise ValueError(f"cannot form {k} clusters from {len(points)} points")
    rng = as_generator(seed)
    centers = points[rng.choice(len(points), size=k, replace=False)].copy()
    labels = None
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        new = _nearest(points, centers)
        for j in range(k):
            if not np.any(new == j):
                big = np.argmax(np.bincount(new, minlength=k))
                idx = np.flatnonzero(new == big)
                gap = np.hypot(*(points[idx] - centers[big]).T)
                new[idx[np.argmax(gap)]] = j
        centers = np.array([points[new == j].mean(axis=0) for j in range(k)])
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
    if labels is None:
        labels = _nearest(points, centers)
    return ClusterAssignment(labels, centers, n_iter)


def initial_clusters(X, positions, k, seed=None, max_iters=100):
    """Cluster the frequently alarmed sensors, then give every sensor its nearest centre.

    The clustered pool is the sensors alarmed in at least a quarter of the
    samples; if that pool has fewer than ``k`` sensors every sensor is used.
    """
    X = check_dataset(X)
    positions = check_positions(positions)
    pool = np.flatnonzero(count_alarms(X) >= band_thresholds(X.shape[0])[2])
    if len(pool) < k:
        pool = np.arange(len(positions))
    km = kmeans_clusters(positions[pool], k, seed, max_iters)
    return ClusterAssignment(_nearest(positions, km.centers), km.centers, km.n_iter)


def _localizer(method, positions, weights=DEFAULT_WEIGHTS, solver="auto",
               node_budget=DEFAULT_NODE_BUDGET):
    if method == "hs":
        return HittingSetLocalizer(positions, solver=solver, node_budget=node_budget)
    if method == "fs":
        return FeatureSelectionLocalizer(positions, weights=weights)
    raise ValueError(f"unknown method {method!r}; use one of {METHODS}")


def per_cluster_localize(X, positions, clusters, method="fs", fallback=None, **params):
    """Run a single-source localizer on each cluster's columns.

    ``clusters`` is a :class:`ClusterAssignment` or a list of index arrays
    (which may overlap). A cluster that cannot be localized falls back to
    ``fallback[j]`` or, if none is given, to the mean position of its
    sensors; it is reported in ``unlocalized``.
    """
    X = check_dataset(X)
    positions = check_positions(positions)
    members = clusters.members() if isinstance(clusters, ClusterAssignment) else list(clusters)
    locs = np.zeros((len(members), 2))
    bad = np.zeros(len(members), dtype=bool)
    for j, cols in enumerate(members):
        cols = np.asarray(cols, dtype=int)
        try:
            if len(cols) == 0:
                raise LocalizationError("empty cluster")
            est = _localizer(method, positions[cols], **params).fit(X[:, cols])
            locs[j] = est.location_
        except LocalizationError:
            bad[j] = True
            if fallback is not None:
                locs[j] = fallback[j]
            elif len(cols):
                locs[j] = positions[cols].mean(axis=0)
            else:
                locs[j] = positions.mean(axis=0)
    return MultiEstimate(locs, 1, False, bad, members)


def _uniform_assignment(n, k, rng):
    """Random labels with every cluster non-empty."""
    labels = rng.integers(0, k, size=n)
    first = rng.permutation(n)[:k]
    labels[first] = np.arange(k)
    return labels


def iterative_localize(X, positions, k, method="fs", seed=None, max_rounds=25, **params):
    """Alternate localization and nearest-estimate reassignment of all sensors.

    Starts from a uniform random assignment, stops when the assignment no
    longer changes (``converged=True``) or after ``max_rounds``
    reassignments.
    """
    X = check_dataset(X)
    positions = check_positions(positions)
    if int(k) < 1 or int(k) > len(positions):
        raise ValueError(f"cannot form {k} clusters from {len(positions)} sensors")
    rng = as_generator(seed)
    labels = _uniform_assignment(len(positions), int(k), rng)
    est = per_cluster_localize(X, positions, [np.flatnonzero(labels == j) for j in range(k)],
                               method, **params)
    rounds = 0
    converged = False
    while rounds < max_rounds:
        rounds += 1
        new = _nearest(positions, est.locations)
        if np.array_equal(new, labels):
            converged = True
            break
        labels = new
        est = per_cluster_localize(X, positions, [np.flatnonzero(labels == j) for j in range(k)],
                                   method, fallback=est.locations, **params)
    est.iterations = rounds
    est.converged = converged
    return est


def match_error(estimates, truths):
    """Mean distance after pairing estimates with sources at minimum total cost."""
    estimates = np.asarray(estimates, dtype=float).reshape(-1, 2)
    truths = np.asarray(truths, dtype=float).reshape(-1, 2)
    if estimates.shape != truths.shape:
        raise ValueError(f"{len(estimates)} estimates for {len(truths)} sources")
    d = np.hypot(estimates[:, None, 0] - truths[None, :, 0],
                 estimates[:, None, 1] - truths[None, :, 1])
    rows, cols = linear_sum_assignment(d)
    return float(d[rows, cols].mean())


class MultiSourceLocalizer(BaseEstimator):
    """Estimate ``n_sources`` locations with per-cluster hitting-set or feature selection.

    With ``iterative=False`` clusters come from k-means over the frequently
    alarmed sensors (optionally widened by ``overlap_radius``); with
    ``iterative=True`` they are refined by nearest-estimate reassignment.
    """

    def __init__(self, sensor_positions=None, n_sources=2, method="fs", iterative=False,
                 max_rounds=25, max_iter=100, overlap_radius=None, weights=DEFAULT_WEIGHTS,
                 solver="auto", node_budget=DEFAULT_NODE_BUDGET, random_state=None):
        self.sensor_positions = sensor_positions
        self.n_sources = n_sources
        self.method = method
        self.iterative = iterative
        self.max_rounds = max_rounds
        self.max_iter = max_iter
        self.overlap_radius = overlap_radius
        self.weights = weights
        self.solver = solver
        self.node_budget = node_budget
        self.random_state = random_state

    def _params(self):
        if self.method == "hs":
            return {"solver": self.solver, "node_budget": self.node_budget}
        return {"weights": self.weights}

    def fit(self, X, y=None):
        pos = check_positions(self.sensor_positions)
        X = check_dataset(X, len(pos))
        if self.iterative:
            est = iterative_localize(X, pos, self.n_sources, self.method, self.random_state,
                                     self.max_rounds, **self._params())
            self.cluster_centers_ = None
        else:
            assign = initial_clusters(X, pos, self.n_sources, self.random_state, self.max_iter)
            clusters = assign.members()
            if self.overlap_radius:
                for j, c in enumerate(assign.centers):
                    near = np.flatnonzero(np.hypot(*(pos - c).T) <= self.overlap_radius)
                    clusters[j] = np.union1d(clusters[j], near)
            est = per_cluster_localize(X, pos, clusters, self.method, **self._params())
            self.cluster_centers_ = assign.centers
        self.locations_ = est.locations
        self.clusters_ = est.clusters
        self.converged_ = est.converged
        self.n_iter_ = est.iterations
        self.unlocalized_ = est.unlocalized
        return self

    def localization_error(self, y):
        check_is_fitted(self, "locations_")
        return match_error(self.locations_, y)

    def score(self, X, y):
        return -self.fit(X).localization_error(y)
