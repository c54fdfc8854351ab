"""Alarm-frequency feature selection.

Sensors are banded by how often they alarmed across ``M`` samples:

* B: count >= floor(3M/4)
* C: floor(M/2) <= count < floor(3M/4)
* D: floor(M/4) <= count < floor(M/2)

anything rarer is dropped. The estimate is the weighted mean of the
per-band centroids, renormalised over the non-empty bands.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .base import LocalizerMixin, NoFeaturesError, check_dataset, check_positions
from .baselines import GridSpec, _grid_argmax
from .simulation import AreaBounds, PropagationParams, SensingParams

DEFAULT_WEIGHTS = (1.0, 1.0, 1.0)


@dataclass(frozen=True)
class FeatureGroups:
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    W: tuple = DEFAULT_WEIGHTS

    @property
    def selected(self):
        return np.sort(np.concatenate([self.B, self.C, self.D]))

    def groups(self):
        return self.B, self.C, self.D


def check_weights(w):
    if isinstance(w, str):
        w = [float(tok) for tok in w.split(",")]
    w = tuple(float(v) for v in w)
    if len(w) != 3:
        raise ValueError(f"need exactly three weights, got {len(w)}")
    if any(v < 0 or not np.isfinite(v) for v in w) or sum(w) <= 0:
        raise ValueError(f"weights must be non-negative with a positive sum, got {w}")
    return w


def count_alarms(X):
    return check_dataset(X).sum(axis=0, dtype=np.int64)


def band_thresholds(m):
    m = int(m)
    return (3 * m) // 4, m // 2, m // 4


def select_features(counts, m, weights=DEFAULT_WEIGHTS):
    if int(m) < 1:
        raise ValueError(f"need at least one sample, got m={m}")
    counts = np.asarray(counts)
    hi, mid, lo = band_thresholds(m)
    in_b = counts >= hi
    in_c = ~in_b & (counts >= mid)
    in_d = ~in_b & ~in_c & (counts >= lo)
    return FeatureGroups(np.flatnonzero(in_b), np.flatnonzero(in_c), np.flatnonzero(in_d),
                         check_weights(weights))


def weighted_centroid(groups, positions):
    positions = np.asarray(positions, dtype=float)
    num = np.zeros(2)
    den = 0.0
    for members, w in zip(groups.groups(), groups.W):
        if len(members):
            num += w * positions[members].mean(axis=0)
            den += w
    if not any(len(g) for g in groups.groups()):
        raise NoFeaturesError("no sensor alarmed often enough to be selected")
    if den == 0:
        raise NoFeaturesError("every non-empty group has zero weight")
    return num / den


def fs_estimate(X, positions, weights=DEFAULT_WEIGHTS):
    X = check_dataset(X)
    groups = select_features(count_alarms(X), X.shape[0], weights)
    return weighted_centroid(groups, positions), groups


def fs_ml_estimate(X, positions, prop=None, sensing=None, grid=None, signal=3000.0, eps=None):
    """Grid ML restricted to the sensors kept by feature selection."""
    X = check_dataset(X)
    groups = select_features(count_alarms(X), X.shape[0])
    cols = groups.selected
    if len(cols) == 0:
        raise NoFeaturesError("no sensor alarmed often enough to be selected")
    loc = _grid_argmax(X, positions, prop or PropagationParams(), sensing or SensingParams(),
                       grid or GridSpec(), signal, columns=cols, eps=eps)
    return loc, groups


class FeatureSelectionLocalizer(LocalizerMixin, BaseEstimator):
    """Weighted centroid of frequently alarmed sensors.

    Needs neither the fault rate nor the region of influence; ``weights``
    scale the B, C and D band centroids.
    """

    def __init__(self, sensor_positions=None, weights=DEFAULT_WEIGHTS):
        self.sensor_positions = sensor_positions
        self.weights = weights

    def fit(self, X, y=None):
        pos = check_positions(self.sensor_positions)
        X = check_dataset(X, len(pos))
        self.counts_ = count_alarms(X)
        self.groups_ = select_features(self.counts_, X.shape[0], self.weights)
        self.location_ = weighted_centroid(self.groups_, pos)
        return self


class FeatureSelectionMLLocalizer(LocalizerMixin, BaseEstimator):
    def __init__(self, sensor_positions=None, signal=3000.0, threshold=5.0, noise_sigma=1.0,
                 v_max=3000.0, alpha=2.0, gamma=1.0, cell_size=1.0, area=(100.0, 100.0),
                 eps=None):
        self.sensor_positions = sensor_positions
        self.signal = signal
        self.threshold = threshold
        self.noise_sigma = noise_sigma
        self.v_max = v_max
        self.alpha = alpha
        self.gamma = gamma
        self.cell_size = cell_size
        self.area = area
        self.eps = eps

    def fit(self, X, y=None):
        pos = check_positions(self.sensor_positions)
        X = check_dataset(X, len(pos))
        self.location_, self.groups_ = fs_ml_estimate(
            X, pos, PropagationParams(self.alpha, self.gamma),
            SensingParams(self.v_max, self.threshold, self.noise_sigma),
            GridSpec(self.cell_size, AreaBounds(*self.area)), self.signal, self.eps)
        return self
