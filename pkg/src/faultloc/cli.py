"""Command-line entry point: ``faultloc {simulate,estimate,sweep,preset,bound}``."""

import argparse
import dataclasses
import sys

from .base import LocalizationError
from .harness import (ESTIMATORS, PRESET_NAMES, ConfigError, ExperimentConfig, format_csv,
                      load_config, parse_field, preset, run_sweep, simulate_trial,
                      _single_estimator)
from .hitting_set import multi_sample_bound
from .io import read_dataset, read_field, write_dataset, write_field

# short flags named in the interface; everything else gets --field-name
_ALIASES = {"cell_size": "--cell-size", "trials": "--trials", "seed": "--seed",
            "weights": "--weights", "solver": "--solver", "estimators": "--estimators"}


def _add_config_flags(p):
    for f in dataclasses.fields(ExperimentConfig):
        flag = _ALIASES.get(f.name, "--" + f.name.replace("_", "-"))
        p.add_argument(flag, dest="cfg_" + f.name, metavar=f.name.upper(), default=None,
                       help=f"override {f.name} (default {f.default!r})")


def _overrides(args):
    out = {}
    for key, val in vars(args).items():
        if key.startswith("cfg_") and val is not None:
            k, v = parse_field(key[4:], val)
            out[k] = v
    return out


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_sweep(args):
    over = _overrides(args)
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    if args.preset:
        cfg = preset(args.preset, **over)
    elif args.config:
        cfg = dataclasses.replace(load_config(args.config), **over).validate()
    else:
        cfg = ExperimentConfig(**over).validate()
    _emit(format_csv(run_sweep(cfg)), args.out)
    return 0


def cmd_preset(args):
    args.config = None
    return cmd_sweep(args)


def cmd_simulate(args):
    over = _overrides(args)
    cfg = ExperimentConfig(**over).validate()
    if cfg.kind != "simulate":
        raise ConfigError("simulate needs kind=simulate")
    sensors, sources, X = simulate_trial(cfg, args.trial)
    write_dataset(args.dataset, X)
    write_field(args.field, sensors)
    for s in sources:
        print(f"source {s.location[0]:.6f} {s.location[1]:.6f}")
    return 0


def cmd_estimate(args):
    over = _overrides(args)
    cfg = ExperimentConfig(**over)
    sensors = read_field(args.field, cfg.bounds)
    X = read_dataset(args.dataset)
    if X.shape[1] != sensors.n_sensors:
        raise ConfigError(f"dataset has {X.shape[1]} columns, field has {sensors.n_sensors}")
    if args.estimator not in ESTIMATORS:
        raise ConfigError(f"unknown estimator {args.estimator!r}; choose from {ESTIMATORS}")
    try:
        loc = _single_estimator(args.estimator, cfg, sensors.positions).fit(X).location_
    except LocalizationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"{loc[0]:.6f} {loc[1]:.6f}")
    return 0


def cmd_bound(args):
    try:
        m = multi_sample_bound(args.delta, args.k, args.degree, args.p_f)
    except ValueError as err:
        raise ConfigError(str(err)) from None
    print(m)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="faultloc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run an experiment config")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--config", help="INI file with an [experiment] section")
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("preset", help="run the config of one figure")
    p.add_argument("preset", metavar="ID", help=", ".join(PRESET_NAMES))
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("simulate", help="write one trial's dataset and field files")
    p.add_argument("--dataset", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--trial", type=int, default=0)
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="run one estimator on a dataset file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--estimator", default="hs")
    _add_config_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bound", help="samples needed for neighbourhood recovery")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--degree", type=int, default=10)
    p.add_argument("--p-f", dest="p_f", type=float, required=True)
    p.add_argument("--k", type=int, default=1, help="number of sources")
    p.set_defaults(func=cmd_bound)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
