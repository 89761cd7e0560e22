"""JSON and CSV input/output helpers.

All floating-point values are written at full double precision (17
significant digits, round-trip exact); outputs carry no timestamps so
identical configurations produce byte-identical files.
"""

import csv
import json

import numpy as np

from .chloroform import TrajectorySample
from .errors import ValidationError


def _normalize(obj):
    """Round-trip floats through .17g and unwrap numpy scalars/arrays."""
    if isinstance(obj, dict):
        return {k: _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.17g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_normalize(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def fmt(x):
    """Full-precision text form of one float."""
    return f"{float(x):.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v
                             for v in row])


def write_trajectory_csv(path, traj):
    """Trajectory CSV: header t,<label>,... one row per time."""
    labels = sorted(traj.observables)
    rows = []
    for i, t in enumerate(traj.times):
        rows.append([t] + [traj.observables[lab][i] for lab in labels])
    write_csv(path, ["t"] + labels, rows)


def read_trajectory_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "t":
            raise ValidationError("trajectory CSV must start with a 't' column")
        labels = header[1:]
        data = [[float(v) for v in row] for row in reader if row]
    if not data:
        raise ValidationError("trajectory CSV carries no rows")
    arr = np.asarray(data)
    return TrajectorySample(
        times=arr[:, 0],
        observables={lab: arr[:, 1 + j] for j, lab in enumerate(labels)},
    )
