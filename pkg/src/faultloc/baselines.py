"""Reference binary estimators: centroid, grid-search ML, fault-tolerant ML and SNAP."""

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, log_ndtr, ndtr
from sklearn.base import BaseEstimator

from .base import (LocalizerMixin, NoAlarmError, check_dataset, check_positions,
                   check_probability)
from .simulation import AreaBounds, PropagationParams, SensingParams, signal_at_distance


@dataclass(frozen=True)
class GridSpec:
    """Candidate locations at the centres of square cells tiling the area.

    Points are ordered row-major (y outer, x inner), which fixes the
    tie-break: the lowest flat index wins.
    """

    cell_size: float = 1.0
    bounds: AreaBounds = AreaBounds()

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")

    @property
    def shape(self):
        ny = int(np.ceil(self.bounds.height / self.cell_size - 1e-9))
        nx = int(np.ceil(self.bounds.width / self.cell_size - 1e-9))
        return max(ny, 1), max(nx, 1)

    def points(self):
        ny, nx = self.shape
        xs = np.minimum((np.arange(nx) + 0.5) * self.cell_size, self.bounds.width)
        ys = np.minimum((np.arange(ny) + 0.5) * self.cell_size, self.bounds.height)
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


def _pairwise_distances(a, b):
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])


# --- centroid ------------------------------------------------------------------

def centroid_estimate(row, positions):
    row = np.asarray(row).astype(bool)
    positions = np.asarray(positions, dtype=float)
    if not row.any():
        raise NoAlarmError("no alarmed sensor in this sample")
    return positions[row].mean(axis=0)


def centroid_per_sample(X, positions):
    """Centroid of alarmed sensors for every row; NaN rows had no alarm."""
    X = np.asarray(X, dtype=float)
    counts = X.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        locs = (X @ np.asarray(positions, dtype=float)) / counts[:, None]
    locs[counts == 0] = np.nan
    return locs


# --- likelihood ----------------------------------------------------------------

def q_function(x):
    """Standard Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def alarm_probability(candidate, sensor_pos, prop=None, sensing=None, signal=3000.0):
    """Probability that a noise-only sensor alarms if the source sits at ``candidate``.

    ``candidate`` may be one point or an array of shape (G, 2); the result
    then has shape (G, N).
    """
    prop = prop or PropagationParams()
    sensing = sensing or SensingParams()
    if not sensing.noise_sigma > 0:
        raise ValueError("alarm probability needs noise_sigma > 0")
    candidate = np.asarray(candidate, dtype=float)
    r = _pairwise_distances(candidate.reshape(-1, 2), np.asarray(sensor_pos, float).reshape(-1, 2))
    s = np.minimum(sensing.v_max, signal_at_distance(signal, r, prop, sensing.v_max))
    q = q_function((sensing.threshold - s) / sensing.noise_sigma)
    if candidate.ndim == 1:
        q = q[0]
        return q if np.ndim(sensor_pos) > 1 else float(q[0])
    return q


def fault_marginal(q, p_f):
    """Alarm probability seen through a channel that flips bits with ``p_f``."""
    return (1.0 - p_f) * q + p_f * (1.0 - q)


def log_alarm_probabilities(candidates, positions, prop=None, sensing=None, signal=3000.0,
                            p_f=0.0, eps=None):
    """``(log q, log(1 - q))`` for every (candidate, sensor) pair, shape (G, N).

    Evaluated in log space so that neither term underflows; a false
    negative next to a candidate therefore costs roughly ``(s - T)**2 / 2
    sigma**2``. Passing ``eps`` instead clips ``q`` to ``[eps, 1 - eps]``
    before taking logs, which caps that cost at ``log(eps)``.
    """
    prop = prop or PropagationParams()
    sensing = sensing or SensingParams()
    if not sensing.noise_sigma > 0:
        raise ValueError("the likelihood needs noise_sigma > 0")
    r = _pairwise_distances(np.asarray(candidates, float).reshape(-1, 2),
                            np.asarray(positions, float).reshape(-1, 2))
    s = np.minimum(sensing.v_max, signal_at_distance(signal, r, prop, sensing.v_max))
    x = (sensing.threshold - s) / sensing.noise_sigma
    if eps is not None:
        q = np.clip(fault_marginal(ndtr(-x), p_f), eps, 1.0 - eps)
        return np.log(q), np.log1p(-q)
    if p_f:
        q, qc = ndtr(-x), ndtr(x)
        return (np.log(fault_marginal(q, p_f)), np.log(fault_marginal(qc, p_f)))
    return log_ndtr(-x), log_ndtr(x)


def _surface(counts, m, logs):
    log_q, log_qc = logs
    return log_q @ counts + log_qc @ (m - counts)


def log_likelihood(X, positions, candidate, prop=None, sensing=None, signal=3000.0, p_f=0.0,
                   eps=None):
    """Binary-decision log-likelihood of ``X`` for one or many candidate locations."""
    X = check_dataset(X)
    logs = log_alarm_probabilities(np.atleast_2d(candidate), positions, prop, sensing, signal,
                                   p_f, eps)
    counts = X.sum(axis=0).astype(float)
    L = _surface(counts, X.shape[0], logs)
    return float(L[0]) if np.ndim(candidate) == 1 else L


def _grid_argmax(X, positions, prop, sensing, grid, signal, p_f=0.0, columns=None, eps=None):
    X = check_dataset(X)
    positions = np.asarray(positions, dtype=float)
    if columns is not None:
        X = X[:, columns]
        positions = positions[columns]
    pts = grid.points()
    logs = log_alarm_probabilities(pts, positions, prop, sensing, signal, p_f, eps)
    L = _surface(X.sum(axis=0).astype(float), X.shape[0], logs)
    return pts[int(np.argmax(L))]


def ml_estimate(X, positions, prop=None, sensing=None, grid=None, signal=3000.0, eps=None):
    """Grid point maximising the log-likelihood."""
    return _grid_argmax(X, positions, prop, sensing, grid or GridSpec(), signal, eps=eps)


def ftml_estimate(X, positions, prop=None, sensing=None, p_f=0.0, grid=None, signal=3000.0,
                  eps=None):
    """ML with each alarm probability marginalised over an assumed fault rate."""
    p_f = check_probability(p_f, "assumed p_f")
    return _grid_argmax(X, positions, prop, sensing, grid or GridSpec(), signal, p_f, eps=eps)


# --- SNAP ----------------------------------------------------------------------

def snap_scores(X, positions, roi_radius, grid=None):
    """SNAP score of every grid cell for every sample, shape (G, M)."""
    if not roi_radius > 0:
        raise ValueError(f"roi_radius must be positive, got {roi_radius}")
    grid = grid or GridSpec()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    covers = (_pairwise_distances(grid.points(), positions) <= roi_radius).astype(float)
    return covers @ (2.0 * X - 1.0).T


def snap_estimate(row, positions, roi_radius, grid=None):
    grid = grid or GridSpec()
    scores = snap_scores(row, positions, roi_radius, grid)[:, 0]
    return grid.points()[int(np.argmax(scores))]


def snap_per_sample(X, positions, roi_radius, grid=None):
    grid = grid or GridSpec()
    scores = snap_scores(X, positions, roi_radius, grid)
    return grid.points()[np.argmax(scores, axis=0)]


# --- estimators ----------------------------------------------------------------

class CentroidLocalizer(LocalizerMixin, BaseEstimator):
    """Per-sample centroid of alarmed sensors.

    Samples with no alarm are skipped; ``location_`` is the mean of the
    per-sample centroids.
    """

    per_sample = True

    def __init__(self, sensor_positions=None):
        self.sensor_positions = sensor_positions

    def fit(self, X, y=None):
        pos = check_positions(self.sensor_positions)
        X = check_dataset(X, len(pos))
        locs = centroid_per_sample(X, pos)
        valid = ~np.isnan(locs[:, 0])
        if not valid.any():
            raise NoAlarmError("no sample contains an alarmed sensor")
        self.sample_locations_ = locs
        self.sample_valid_ = valid
        self.location_ = locs[valid].mean(axis=0)
        return self

    def predict(self, X):
        pos = check_positions(self.sensor_positions)
        return centroid_per_sample(check_dataset(X, len(pos)), pos)


class _GridModelParams:
    def _models(self):
        prop = PropagationParams(self.alpha, self.gamma)
        sensing = SensingParams(self.v_max, self.threshold, self.noise_sigma)
        grid = GridSpec(self.cell_size, AreaBounds(*self.area))
        return prop, sensing, grid


class MaximumLikelihoodLocalizer(_GridModelParams, LocalizerMixin, BaseEstimator):
    """Exhaustive grid search of the binary log-likelihood (source power known)."""

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

    def _assumed_p_f(self):
        return 0.0

    def fit(self, X, y=None):
        pos = check_positions(self.sensor_positions)
        X = check_dataset(X, len(pos))
        prop, sensing, grid = self._models()
        self.location_ = _grid_argmax(X, pos, prop, sensing, grid, self.signal,
                                      self._assumed_p_f(), eps=self.eps)
        return self


class FaultTolerantMLLocalizer(MaximumLikelihoodLocalizer):
    """Grid ML where every decision may have been flipped with probability ``p_f``."""

    def __init__(self, sensor_positions=None, p_f=0.0, signal=3000.0, threshold=5.0,
                 noise_sigma=1.0, v_max=3000.0, alpha=2.0, gamma=1.0, cell_size=1.0,
                 area=(100.0, 100.0), eps=None):
        super().__init__(sensor_positions, signal, threshold, noise_sigma, v_max, alpha,
                         gamma, cell_size, area, eps)
        self.p_f = p_f

    def _assumed_p_f(self):
        return check_probability(self.p_f, "assumed p_f")


class SNAPLocalizer(LocalizerMixin, BaseEstimator):
    """Subtract-on-negative, add-on-positive grid voting, one estimate per sample."""

    per_sample = True

    def __init__(self, sensor_positions=None, roi_radius=np.sqrt(600.0), cell_size=1.0,
                 area=(100.0, 100.0)):
        self.sensor_positions = sensor_positions
        self.roi_radius = roi_radius
        self.cell_size = cell_size
        self.area = area

    def fit(self, X, y=None):
        self.sample_locations_ = self.predict(X)
        self.sample_valid_ = np.ones(len(self.sample_locations_), dtype=bool)
        self.location_ = self.sample_locations_.mean(axis=0)
        return self

    def predict(self, X):
        pos = check_positions(self.sensor_positions)
        X = check_dataset(X, len(pos))
        grid = GridSpec(self.cell_size, AreaBounds(*self.area))
        return snap_per_sample(X, pos, self.roi_radius, grid)

