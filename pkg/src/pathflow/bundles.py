"""Path-bundle JSON serialization.

Schema (format 1):

    {
      "format": 1,
      "group": {"tag": "torus" | "so3" | "heisenberg", "dim": k},
      "grid": N,
      "weights": [w_1, ..., w_n],
      "paths": [[point, ...], ...]
    }

Points are angle arrays (torus), row-major 3x3 matrices flattened to 9
numbers (so3), or (xi, eta, t) arrays (heisenberg).  Floats are written
with Python's shortest round-trip representation (at most 17 significant
digits), so a write/read cycle reproduces every double bit for bit and
identical inputs produce byte-identical files.
"""

import json

import numpy as np

from .groups import group_dim, group_from_tag
from .paths import DiscretePath, EmpiricalMeasure

BUNDLE_FORMAT = 1


def _point_to_json(group, point):
    if group.tag == "so3":
        return [float(x) for x in np.asarray(point).reshape(9)]
    return [float(x) for x in np.asarray(point)]


def _point_from_json(group, data):
    arr = np.asarray(data, dtype=np.float64)
    if group.tag == "so3":
        if arr.shape != (9,):
            raise ValueError("so3 points must have 9 row-major entries")
        return arr.reshape(3, 3)
    if arr.shape != group.element_shape:
        raise ValueError(f"point has wrong length for group {group.tag}")
    return arr


def measure_to_dict(measure):
    group = measure.group
    return {
        "format": BUNDLE_FORMAT,
        "group": {"tag": group.tag, "dim": group_dim(group)},
        "grid": measure.grid_size,
        "weights": [float(w) for w in measure.weights],
        "paths": [
            [_point_to_json(group, pt) for pt in path.points]
            for path in measure.support
        ],
    }


def measure_from_dict(data):
    if data.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"unsupported bundle format {data.get('format')!r}")
    group = group_from_tag(data["group"]["tag"], data["group"]["dim"])
    grid = int(data["grid"])
    paths = []
    for raw in data["paths"]:
        if len(raw) != grid + 1:
            raise ValueError("path length does not match the declared grid")
        pts = np.stack([_point_from_json(group, pt) for pt in raw])
        paths.append(DiscretePath(group, pts))
    weights = np.asarray(data["weights"], dtype=np.float64)
    return EmpiricalMeasure(tuple(paths), weights)


def write_bundle(path, measure):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(measure_to_dict(measure), fh, indent=1)
        fh.write("\n")


def read_bundle(path):
    with open(path, "r", encoding="utf-8") as fh:
        return measure_from_dict(json.load(fh))
