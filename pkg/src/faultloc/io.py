"""Plain-text readers and writers for datasets, sensor fields and hitting-set instances.

Dataset file::

    M N
    0 1 0 ...      (M lines of N space-separated bits)

Field file::

    N
    x y            (N lines, fixed point with 6 fractional digits)

Instance file: one subset per line, space-separated sensor labels.
"""

import numpy as np

from .base import check_dataset
from .simulation import AreaBounds, SensorField


def write_dataset(path, X):
    X = check_dataset(X)
    with open(path, "w") as fh:
        fh.write(f"{X.shape[0]} {X.shape[1]}\n")
        for row in X:
            fh.write(" ".join(map(str, row.tolist())) + "\n")


def read_dataset(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: first line must be 'M N'")
        m, n = int(header[0]), int(header[1])
        rows = [line.split() for line in fh if line.strip()]
    if len(rows) != m:
        raise ValueError(f"{path}: header says {m} samples, found {len(rows)}")
    X = np.array(rows, dtype=np.int64).reshape(m, -1) if m else np.zeros((0, n))
    if X.shape[1] != n:
        raise ValueError(f"{path}: header says {n} sensors, rows have {X.shape[1]}")
    return check_dataset(X)


def write_field(path, field):
    pos = field.positions if isinstance(field, SensorField) else np.asarray(field)
    with open(path, "w") as fh:
        fh.write(f"{len(pos)}\n")
        for x, y in pos:
            fh.write(f"{x:.6f} {y:.6f}\n")


def read_field(path, bounds=None):
    with open(path) as fh:
        n = int(fh.readline())
        pos = np.loadtxt(fh, ndmin=2)
    if pos.shape != (n, 2):
        raise ValueError(f"{path}: expected {n} lines of 'x y', got shape {pos.shape}")
    return SensorField(pos, bounds or AreaBounds())


def write_instance(path, subsets):
    with open(path, "w") as fh:
        for s in subsets:
            fh.write(" ".join(str(i) for i in sorted(s)) + "\n")


def read_instance(path):
    with open(path) as fh:
        return [frozenset(int(tok) for tok in line.split()) for line in fh if line.strip()]
