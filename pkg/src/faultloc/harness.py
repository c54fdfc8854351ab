"""Seeded Monte Carlo sweeps over one experiment parameter, with CSV output.

An :class:`ExperimentConfig` names the model, the estimators to compare and
a single sweep axis. :func:`run_sweep` runs ``trials`` independent trials at
every sweep value and averages each estimator's localization error.

Every trial draws its sensor field, source placement and data from streams
seeded by ``(seed, trial)`` only, so the same trial sees the same random
numbers at every sweep value and truncating ``trials`` keeps earlier trials
intact.
"""

import configparser
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .base import LocalizationError
from .baselines import (CentroidLocalizer, FaultTolerantMLLocalizer, MaximumLikelihoodLocalizer,
                        SNAPLocalizer)
from .feature_selection import (DEFAULT_WEIGHTS, FeatureSelectionLocalizer,
                                FeatureSelectionMLLocalizer, check_weights)
from .hitting_set import HittingSetLocalizer, multi_sample_bound
from .multi_source import MultiSourceLocalizer, match_error
from .simulation import (AreaBounds, FaultParams, PropagationParams, SensingParams, SourceSpec,
                         deploy_sensors, generate_dataset, place_source, place_source_pair,
                         roi_radius, trial_seed)

ESTIMATORS = ("ce", "ml", "ftml", "snap", "hs", "fs", "fsml")
MULTI_ESTIMATORS = ("hs", "fs")
SWEEP_AXES = ("threshold", "p_f", "m", "n", "variance", "distance")
PLACEMENTS = ("uniform", "fixed", "pair")
KINDS = ("simulate", "bound")
CSV_HEADER = "sweep_value,estimator,avg_rms,trials,flagged"

PF_GRID = tuple(round(0.05 * i, 2) for i in range(9))
T_GRID = tuple(float(t) for t in range(1, 11))
M_GRID = (25, 50, 100, 150, 200)
N_GRID = (50, 100, 150, 200)
VAR_GRID = (1.0, 2.0, 4.0, 6.0, 9.0)
DIST_GRID = (20.0, 40.0, 60.0, 80.0)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "custom"
    kind: str = "simulate"
    area: tuple = (100.0, 100.0)
    n_sensors: int = 200
    m_samples: int = 100
    k_sources: int = 1
    placement: str = "uniform"
    source_location: tuple = (15.0, 15.0)
    source_distance: float = 80.0
    signal: float = 3000.0
    alpha: float = 2.0
    gamma: float = 1.0
    v_max: float = 3000.0
    threshold: float = 5.0
    noise_sigma: float = 1.0
    p_f: float = 0.0
    estimators: tuple = ("ce", "ml", "fs", "hs")
    cell_size: float = 1.0
    weights: tuple = DEFAULT_WEIGHTS
    ftml_pf_offset: float = 0.0
    snap_roi_scale: float = 1.0
    solver: str = "auto"
    iterative: bool = False
    trials: int = 100
    seed: int = 0
    sweep_axis: str = "p_f"
    sweep_values: tuple = PF_GRID
    fixed_field: bool = False
    bound_delta: float = 0.1
    bound_degree: int = 10
    n_jobs: int = 1

    def validate(self):
        def need(ok, msg):
            if not ok:
                raise ConfigError(msg)

        need(self.kind in KINDS, f"kind must be one of {KINDS}, got {self.kind!r}")
        need(self.sweep_axis in SWEEP_AXES,
             f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        need(len(self.sweep_values) > 0, "sweep_values is empty")
        need(int(self.trials) >= 1, f"trials must be at least 1, got {self.trials}")
        need(len(self.area) == 2 and min(self.area) > 0, f"bad area {self.area}")
        need(self.placement in PLACEMENTS,
             f"placement must be one of {PLACEMENTS}, got {self.placement!r}")
        need(int(self.k_sources) >= 1, "k_sources must be at least 1")
        need(self.solver in ("auto", "exact", "greedy"), f"unknown solver {self.solver!r}")
        need(self.cell_size > 0, "cell_size must be positive")
        need(self.snap_roi_scale > 0, "snap_roi_scale must be positive")
        try:
            check_weights(self.weights)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        allowed = MULTI_ESTIMATORS if self.k_sources > 1 else ESTIMATORS
        bad = [e for e in self.estimators if e not in allowed]
        need(not bad and len(self.estimators) > 0,
             f"estimators {bad or '(none)'} not available; choose from {allowed}")
        if self.kind == "bound":
            need(self.sweep_axis == "p_f", "a bound preset sweeps p_f")
            need(0 < self.bound_delta < 1 and self.bound_degree >= 1, "bad bound parameters")
            return self
        if self.placement == "pair" or self.sweep_axis == "distance":
            need(self.k_sources == 2, "pair placement and distance sweeps need k_sources=2")
        for v in self.sweep_values:
            cfg = self.at(v)
            need(0 <= cfg.p_f < 0.5, f"p_f must lie in [0, 0.5), got {cfg.p_f}")
            need(cfg.threshold > 0, f"threshold must be positive, got {cfg.threshold}")
            need(cfg.noise_sigma >= 0, f"noise_sigma must be non-negative")
            need(cfg.m_samples >= 1 and cfg.n_sensors >= 1, "need m_samples, n_sensors >= 1")
            if any(e in ("ml", "ftml", "fsml") for e in self.estimators):
                need(cfg.noise_sigma > 0, "likelihood estimators need noise_sigma > 0")
        return self

    def at(self, value):
        """This config with the sweep axis set to ``value``."""
        axis = self.sweep_axis
        if axis == "threshold":
            return dataclasses.replace(self, threshold=float(value))
        if axis == "p_f":
            return dataclasses.replace(self, p_f=float(value))
        if axis == "m":
            return dataclasses.replace(self, m_samples=int(value))
        if axis == "n":
            return dataclasses.replace(self, n_sensors=int(value))
        if axis == "variance":
            return dataclasses.replace(self, noise_sigma=math.sqrt(float(value)))
        if axis == "distance":
            return dataclasses.replace(self, placement="pair", source_distance=float(value))
        raise ConfigError(f"unknown sweep axis {axis!r}")

    @property
    def bounds(self):
        return AreaBounds(*map(float, self.area))

    @property
    def prop(self):
        return PropagationParams(self.alpha, self.gamma)

    @property
    def sensing(self):
        return SensingParams(self.v_max, self.threshold, self.noise_sigma)


@dataclass
class SweepResult:
    """Per-trial errors for every (sweep value, estimator); NaN marks a flagged trial."""

    config: ExperimentConfig
    errors: dict = field(default_factory=dict)
    precomputed: dict = field(default_factory=dict)

    def rows(self):
        out = []
        for (value, name), errs in self.errors.items():
            errs = np.asarray(errs, dtype=float)
            ok = ~np.isnan(errs)
            avg = float(errs[ok].mean()) if ok.any() else float("nan")
            out.append((float(value), name, avg, int(ok.sum()), int((~ok).sum())))
        for (value, name), v in self.precomputed.items():
            out.append((float(value), name, float(v), 1, 0))
        return sorted(out, key=lambda r: (r[0], r[1]))


def rms_error(estimates, truths):
    """Mean Euclidean distance between paired estimates and true locations."""
    est = np.asarray(estimates, dtype=float).reshape(-1, 2)
    tru = np.asarray(truths, dtype=float).reshape(-1, 2)
    if est.shape != tru.shape:
        raise ValueError(f"{len(est)} estimates for {len(tru)} true locations")
    if len(est) == 0:
        raise ValueError("no estimates")
    return float(np.hypot(*(est - tru).T).mean())


# --- one trial -----------------------------------------------------------------

def _single_estimator(name, cfg, pos):
    model = dict(signal=cfg.signal, threshold=cfg.threshold, noise_sigma=cfg.noise_sigma,
                 v_max=cfg.v_max, alpha=cfg.alpha, gamma=cfg.gamma, cell_size=cfg.cell_size,
                 area=tuple(cfg.area))
    if name == "ce":
        return CentroidLocalizer(pos)
    if name == "ml":
        return MaximumLikelihoodLocalizer(pos, **model)
    if name == "ftml":
        return FaultTolerantMLLocalizer(pos, p_f=cfg.p_f + cfg.ftml_pf_offset, **model)
    if name == "snap":
        r = cfg.snap_roi_scale * roi_radius(cfg.signal, cfg.threshold, cfg.prop)
        return SNAPLocalizer(pos, roi_radius=r, cell_size=cfg.cell_size, area=tuple(cfg.area))
    if name == "hs":
        return HittingSetLocalizer(pos, solver=cfg.solver)
    if name == "fs":
        return FeatureSelectionLocalizer(pos, weights=cfg.weights)
    if name == "fsml":
        return FeatureSelectionMLLocalizer(pos, **model)
    raise ConfigError(f"unknown estimator {name!r}")


def simulate_trial(cfg, trial):
    """Field, sources and dataset of one trial (``cfg`` already at its sweep value)."""
    bounds = cfg.bounds
    field_trial = 0 if cfg.fixed_field else trial
    sensors = deploy_sensors(cfg.n_sensors, bounds, trial_seed(cfg.seed, field_trial, "field"))
    src_seed = trial_seed(cfg.seed, trial, "source")
    if cfg.placement == "fixed":
        sources = [SourceSpec(tuple(cfg.source_location), cfg.signal)]
    elif cfg.placement == "pair":
        sources = list(place_source_pair(cfg.source_distance, bounds, src_seed, cfg.signal))
    else:
        rng = np.random.default_rng(src_seed)
        sources = [place_source(bounds, rng, cfg.signal) for _ in range(cfg.k_sources)]
    X = generate_dataset(sensors, sources, cfg.prop, cfg.sensing, FaultParams(cfg.p_f),
                         cfg.m_samples, trial_seed(cfg.seed, trial, "noise"))
    return sensors, sources, X


def run_trial(cfg, trial):
    """Error of every configured estimator on one trial; NaN if it failed."""
    sensors, sources, X = simulate_trial(cfg, trial)
    pos = sensors.positions
    truth = np.array([s.location for s in sources], dtype=float)
    out = {}
    for name in cfg.estimators:
        try:
            if len(sources) == 1:
                est = _single_estimator(name, cfg, pos).fit(X)
                out[name] = float(est.localization_error(truth[0]))
            else:
                est = MultiSourceLocalizer(
                    pos, n_sources=len(sources), method=name, iterative=cfg.iterative,
                    weights=cfg.weights, solver=cfg.solver,
                    random_state=trial_seed(cfg.seed, trial, "cluster")).fit(X)
                out[name] = match_error(est.locations_, truth)
        except (LocalizationError, ValueError):
            out[name] = float("nan")
    return out


def run_sweep(config):
    config = config.validate()
    result = SweepResult(config)
    if config.kind == "bound":
        for p in config.sweep_values:
            result.precomputed[(float(p), "sample_bound")] = multi_sample_bound(
                config.bound_delta, config.k_sources, config.bound_degree, float(p))
        return result
    tasks = [(v, b) for v in config.sweep_values for b in range(config.trials)]
    outs = Parallel(n_jobs=config.n_jobs)(delayed(run_trial)(config.at(v), b) for v, b in tasks)
    for v in config.sweep_values:
        for name in config.estimators:
            result.errors[(float(v), name)] = np.full(config.trials, np.nan)
    for (v, b), out in zip(tasks, outs):
        for name, err in out.items():
            result.errors[(float(v), name)][b] = err
    return result


def format_csv(result):
    lines = [CSV_HEADER]
    for value, name, avg, n_ok, n_bad in result.rows():
        lines.append(f"{value:.6f},{name},{avg:.6f},{n_ok},{n_bad}")
    return "\n".join(lines) + "\n"


def write_csv(result, path):
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(result))


# --- presets -------------------------------------------------------------------

_SINGLE = ("ce", "ml", "fs", "hs")

_PRESETS = {
    "fig3": dict(kind="bound", sweep_axis="p_f", sweep_values=(0.1, 0.2, 0.3, 0.4, 0.5),
                 estimators=("hs",), bound_delta=0.1, bound_degree=10),
    "fig4a": dict(sweep_axis="threshold", sweep_values=T_GRID, p_f=0.1, m_samples=50,
                  n_sensors=150, estimators=_SINGLE),
    "fig4b": dict(sweep_axis="threshold", sweep_values=T_GRID, p_f=0.1, m_samples=100,
                  n_sensors=200, estimators=_SINGLE),
    "fig5a": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=100, n_sensors=150,
                  estimators=_SINGLE),
    "fig5b": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=100, n_sensors=200,
                  estimators=_SINGLE),
    "fig6": dict(sweep_axis="m", sweep_values=M_GRID, p_f=0.2, n_sensors=200,
                 estimators=_SINGLE),
    "fig7": dict(sweep_axis="n", sweep_values=N_GRID, p_f=0.1, m_samples=200,
                 estimators=_SINGLE),
    "fig8a": dict(sweep_axis="variance", sweep_values=VAR_GRID, p_f=0.0, m_samples=50,
                  n_sensors=200, estimators=_SINGLE),
    "fig8b": dict(sweep_axis="variance", sweep_values=VAR_GRID, p_f=0.2, m_samples=50,
                  n_sensors=200, estimators=_SINGLE),
    "fig9": dict(sweep_axis="p_f", sweep_values=PF_GRID, k_sources=2, m_samples=50,
                 n_sensors=200, estimators=("fs", "hs")),
    "fig10": dict(sweep_axis="distance", sweep_values=DIST_GRID, k_sources=2, placement="pair",
                  p_f=0.2, m_samples=50, n_sensors=200, estimators=("fs", "hs")),
    "figA1a": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=10, n_sensors=200,
                   estimators=_SINGLE),
    "figA1b": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=20, n_sensors=200,
                   estimators=_SINGLE),
    "figB1": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=20, n_sensors=50,
                  estimators=("fs", "ftml", "hs", "snap"), ftml_pf_offset=0.05,
                  snap_roi_scale=1.2),
    "figB2a": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=20, n_sensors=50,
                   estimators=("fsml", "ftml", "snap"), ftml_pf_offset=0.05,
                   snap_roi_scale=1.2),
    "figB2b": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=20, n_sensors=100,
                   estimators=("fsml", "ftml", "snap"), ftml_pf_offset=0.05,
                   snap_roi_scale=1.2),
    "mlmod-a": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=20, n_sensors=50,
                    estimators=("fsml", "ftml", "snap")),
    "mlmod-b": dict(sweep_axis="p_f", sweep_values=PF_GRID, m_samples=20, n_sensors=100,
                    estimators=("fsml", "ftml", "snap")),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name, **overrides):
    """Config reproducing one figure; keyword overrides replace any field."""
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}")
    params = dict(_PRESETS[name], name=name)
    params.update(overrides)
    return ExperimentConfig(**params).validate()


# --- config files --------------------------------------------------------------

def _floats(text):
    return tuple(float(tok) for tok in str(text).replace(",", " ").split())


def _names(text):
    return tuple(tok.strip() for tok in str(text).split(",") if tok.strip())


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


FIELD_PARSERS = {
    "name": str, "kind": str, "placement": str, "solver": str, "sweep_axis": str,
    "area": _floats, "source_location": _floats, "sweep_values": _floats, "weights": _floats,
    "estimators": _names,
    "n_sensors": int, "m_samples": int, "k_sources": int, "trials": int, "seed": int,
    "bound_degree": int, "n_jobs": int,
    "iterative": _bool, "fixed_field": _bool,
}


def parse_field(key, text):
    key = key.replace("-", "_")
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    if key not in names:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return key, FIELD_PARSERS.get(key, float)(text)
    except ValueError as err:
        raise ConfigError(f"bad value for {key}: {err}") from None


def config_from_mapping(mapping, base=None):
    """Build a config from string values, starting from ``base`` or a named preset."""
    mapping = dict(mapping)
    values = dict(parse_field(k, v) for k, v in mapping.items())
    name = values.get("name")
    if base is None and name in _PRESETS:
        base = preset(name)
    base = base or ExperimentConfig()
    return dataclasses.replace(base, **values).validate()


def load_config(path):
    """Read an INI file with an ``[experiment]`` section."""
    parser = configparser.ConfigParser()
    try:
        if not parser.read(path):
            raise ConfigError(f"cannot read config file {path}")
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from None
    if "experiment" not in parser:
        raise ConfigError(f"{path}: missing [experiment] section")
    return config_from_mapping(parser["experiment"])
