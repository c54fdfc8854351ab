"""Sensor fields, the attenuation/threshold observation model and the fault channel.

Everything here is a pure function of its arguments and an explicit seed.
Seeds may be an ``int``, a :class:`numpy.random.SeedSequence` or a
:class:`numpy.random.Generator`; integer seeds and sequences are expanded
into independent child streams so that, for example, noise draws and fault
draws never share random numbers.
"""

from dataclasses import dataclass, field

import numpy as np

from .base import check_probability


@dataclass(frozen=True)
class AreaBounds:
    width: float = 100.0
    height: float = 100.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"area must have positive extent, got {self.width}x{self.height}")

    def contains(self, points, tol=0.0):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return ((points[:, 0] >= -tol) & (points[:, 0] <= self.width + tol)
                & (points[:, 1] >= -tol) & (points[:, 1] <= self.height + tol))


@dataclass(frozen=True, eq=False)
class SensorField:
    positions: np.ndarray
    bounds: AreaBounds = field(default_factory=AreaBounds)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or len(pos) < 1:
            raise ValueError(f"positions must have shape (N, 2) with N >= 1, got {pos.shape}")
        if not np.all(self.bounds.contains(pos)):
            raise ValueError("every sensor must lie inside the area bounds")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_sensors(self):
        return len(self.positions)

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class SourceSpec:
    location: tuple
    signal: float = 3000.0

    def __post_init__(self):
        loc = tuple(float(v) for v in self.location)
        if len(loc) != 2:
            raise ValueError("source location must be (x, y)")
        if not self.signal > 0:
            raise ValueError(f"emitted signal must be positive, got {self.signal}")
        object.__setattr__(self, "location", loc)


@dataclass(frozen=True)
class PropagationParams:
    alpha: float = 2.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.gamma > 0):
            raise ValueError("alpha and gamma must be positive")


@dataclass(frozen=True)
class SensingParams:
    v_max: float = 3000.0
    threshold: float = 5.0
    noise_sigma: float = 1.0

    def __post_init__(self):
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass(frozen=True)
class FaultParams:
    p_f: float = 0.0

    def __post_init__(self):
        check_probability(self.p_f)


# --- seeding -----------------------------------------------------------------

_STREAMS = {"field": 0, "source": 1, "noise": 2, "fault": 3, "cluster": 4}


def trial_seed(master_seed, trial, stream):
    """Seed for one named stream of one Monte Carlo trial.

    Depends only on ``(master_seed, trial, stream)``, so trials can run in any
    order and truncating the trial count never changes earlier trials.
    """
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(trial), _STREAMS[stream]))


def as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _child_generators(seed, n):
    if isinstance(seed, np.random.Generator):
        return [seed] * n
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in seed.spawn(n)]


# --- deployment --------------------------------------------------------------

def deploy_sensors(n, bounds=None, seed=None):
    """Scatter ``n`` sensors uniformly over ``bounds``."""
    bounds = bounds or AreaBounds()
    if int(n) < 1:
        raise ValueError(f"need at least one sensor, got n={n}")
    rng = as_generator(seed)
    xy = rng.uniform(0.0, 1.0, size=(int(n), 2)) * [bounds.width, bounds.height]
    return SensorField(xy, bounds)


def place_source(bounds=None, seed=None, signal=3000.0):
    bounds = bounds or AreaBounds()
    rng = as_generator(seed)
    x, y = rng.uniform(0.0, 1.0, size=2) * [bounds.width, bounds.height]
    return SourceSpec((x, y), signal)


def place_source_pair(distance, bounds=None, seed=None, signal=3000.0, max_tries=10_000):
    """Two sources exactly ``distance`` apart, both inside ``bounds``.

    The first source is uniform over the area and the direction is uniform;
    draws that put the second source outside are rejected.
    """
    bounds = bounds or AreaBounds()
    if distance < 0 or distance > np.hypot(bounds.width, bounds.height):
        raise ValueError(f"no pair of in-area points is {distance} apart")
    rng = as_generator(seed)
    for _ in range(max_tries):
        p = rng.uniform(0.0, 1.0, size=2) * [bounds.width, bounds.height]
        phi = rng.uniform(0.0, 2 * np.pi)
        q = p + distance * np.array([np.cos(phi), np.sin(phi)])
        if bounds.contains(q)[0]:
            return [SourceSpec(tuple(p), signal), SourceSpec(tuple(q), signal)]
    raise RuntimeError(f"could not place a source pair {distance} apart")


# --- observation model -------------------------------------------------------

def distances(points, location):
    points = np.asarray(points, dtype=float)
    return np.hypot(points[..., 0] - location[0], points[..., 1] - location[1])


def signal_at_distance(signal, r, prop=None, v_max=np.inf):
    """Noise-free attenuated signal ``gamma * c / r**alpha``.

    A sensor sitting on the source (``r == 0``) reads ``v_max``.
    """
    prop = prop or PropagationParams()
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        s = prop.gamma * signal / r ** prop.alpha
    s = np.where(r == 0, v_max, s)
    return s if s.ndim else float(s)


def attenuated_signal(source, sensor_pos, prop=None, v_max=np.inf):
    r = distances(sensor_pos, source.location)
    return signal_at_distance(source.signal, r, prop, v_max)


def roi_radius(source, threshold, prop=None):
    """Radius inside which the noise-free signal reaches ``threshold``."""
    prop = prop or PropagationParams()
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    signal = source.signal if isinstance(source, SourceSpec) else float(source)
    return (prop.gamma * signal / threshold) ** (1.0 / prop.alpha)


def noise_free_signal(sources, positions, prop=None, v_max=np.inf):
    """Superposed noise-free signal of all ``sources`` at each position."""
    if isinstance(sources, SourceSpec):
        sources = [sources]
    if not sources:
        raise ValueError("at least one source is required")
    return sum(attenuated_signal(s, positions, prop, v_max) for s in sources)


def measure(sources, sensor_pos, prop=None, sensing=None, noise=0.0):
    """Saturating measurement ``min(v_max, sum_j s_j + w)``."""
    sensing = sensing or SensingParams()
    s = noise_free_signal(sources, sensor_pos, prop, sensing.v_max)
    z = np.minimum(sensing.v_max, s + noise)
    return z if np.ndim(z) else float(z)


def quantize(z, threshold):
    """Alarm bit: 1 when the measurement reaches the threshold."""
    b = (np.asarray(z) >= threshold).astype(np.uint8)
    return b if b.ndim else int(b)


def fault_channel(bits, p_f, seed=None):
    """Flip each bit independently with probability ``p_f``."""
    p_f = check_probability(p_f)
    bits = np.asarray(bits, dtype=np.uint8)
    u = as_generator(seed).random(bits.shape)
    out = bits ^ (u < p_f).astype(np.uint8)
    return out if out.ndim else int(out)


def generate_dataset(field, sources, prop=None, sensing=None, fault=None, m=1, seed=None):
    """Simulate ``m`` fused binary samples of shape ``(m, N)``.

    Pipeline per (sample, sensor): measure with Gaussian noise, threshold,
    then pass through the fault channel.
    """
    prop = prop or PropagationParams()
    sensing = sensing or SensingParams()
    fault = fault or FaultParams()
    m = int(m)
    if m < 1:
        raise ValueError(f"need at least one sample, got m={m}")
    noise_rng, fault_rng = _child_generators(seed, 2)
    shape = (m, field.n_sensors)
    s = noise_free_signal(sources, field.positions, prop, sensing.v_max)
    w = sensing.noise_sigma * noise_rng.standard_normal(shape)
    z = np.minimum(sensing.v_max, s[None, :] + w)
    bits = (z >= sensing.threshold).astype(np.uint8)
    flips = fault_rng.random(shape) < fault.p_f
    return bits ^ flips.astype(np.uint8)


def true_neighborhood(field, source, prop=None, threshold=5.0):
    """Indices (0-based) of sensors within the ROI radius, boundary included."""
    positions = field.positions if isinstance(field, SensorField) else np.asarray(field)
    r_c = roi_radius(source, threshold, prop)
    return np.flatnonzero(distances(positions, source.location) <= r_c)
