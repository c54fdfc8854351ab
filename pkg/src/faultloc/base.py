"""Shared estimator plumbing: error types, input validation and the localizer mixin."""

import numpy as np
from sklearn.utils.validation import check_array, check_is_fitted


class LocalizationError(ValueError):
    """Base class for estimator failures that a sweep records instead of aborting."""


class NoAlarmError(LocalizationError):
    """No sensor reported an alarm, so there is nothing to average."""


class NoFeaturesError(LocalizationError):
    """Feature selection kept no sensor in any relevance group."""


class EmptyCollectionError(LocalizationError):
    """Every sample was empty; the hitting-set instance has no subsets."""


class SolverBudgetError(LocalizationError):
    """Exact hitting-set search ran out of branch nodes.

    ``incumbent`` holds the best hitting set found before the budget ran out.
    """

    def __init__(self, message, incumbent=None):
        super().__init__(message)
        self.incumbent = incumbent


def check_positions(positions):
    positions = check_array(positions, dtype=np.float64, ensure_min_samples=1)
    if positions.shape[1] != 2:
        raise ValueError(f"sensor positions must have shape (n, 2), got {positions.shape}")
    return positions


def check_dataset(X, n_sensors=None):
    """Validate a binary decision matrix (rows = samples, columns = sensors).

    Returns a uint8 copy-free view when possible.
    """
    X = check_array(X, dtype=None, ensure_min_samples=1, ensure_min_features=1)
    if not np.all((X == 0) | (X == 1)):
        raise ValueError("dataset entries must be exactly 0 or 1")
    if n_sensors is not None and X.shape[1] != n_sensors:
        raise ValueError(
            f"dataset has {X.shape[1]} columns but the field has {n_sensors} sensors")
    return X.astype(np.uint8, copy=False)


def check_probability(p, name="p_f", upper=0.5):
    p = float(p)
    if not 0.0 <= p < upper:
        raise ValueError(f"{name} must lie in [0, {upper}), got {p}")
    return p


class LocalizerMixin:
    """Mixin for single-source localizers.

    Subclasses implement ``fit(X)`` and set ``location_``. Per-sample
    estimators (centroid, SNAP) also set ``sample_locations_`` and
    ``sample_valid_``; their error is the mean of per-sample distances,
    not the distance of the averaged location.
    """

    per_sample = False

    def localization_error(self, y):
        check_is_fitted(self, "location_")
        y = np.asarray(y, dtype=float).reshape(2)
        if self.per_sample:
            locs = self.sample_locations_[self.sample_valid_]
            return float(np.mean(np.hypot(locs[:, 0] - y[0], locs[:, 1] - y[1])))
        return float(np.hypot(*(self.location_ - y)))

    def score(self, X, y):
        """Negative localization error against the true source location ``y``."""
        return -self.fit(X).localization_error(y)

    def _more_tags(self):
        return {"requires_y": False, "X_types": ["2darray"]}
