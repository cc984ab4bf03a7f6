"""Shared helpers and independent oracles for the test suite."""

import numpy as np

import pathflow as pf


def skew(x):
    x = np.asarray(x, dtype=np.float64)
    return np.array(
        [
            [0.0, -x[2], x[1]],
            [x[2], 0.0, -x[0]],
            [-x[1], x[0], 0.0],
        ]
    )


def series_exp(mat, terms=30):
    """Truncated matrix power series; oracle for the group exponential."""
    out = np.eye(mat.shape[0])
    term = np.eye(mat.shape[0])
    for k in range(1, terms + 1):
        term = term @ mat / k
        out = out + term
    return out


def axis_angle_rotation(axis, angle):
    """Rodrigues-free oracle: rotation assembled from the series."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    return series_exp(skew(axis * angle), terms=40)


def random_rotation(rng, max_angle=np.pi * 0.999):
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    return pf.SO3().exp(direction * rng.uniform(0.0, max_angle))


def brownian_bundle(group, grid, atoms, rng):
    return pf.EmpiricalMeasure.uniform(
        [pf.sample_brownian_path(group, grid, rng) for _ in range(atoms)]
    )


def scaled_torus_bundle(group, grid, atoms, rng, scale):
    """Small-amplitude bundles keeping all pairwise L2 distances below 1."""
    paths = []
    for _ in range(atoms):
        xi = rng.standard_normal((grid, group.dim)) * scale / np.sqrt(grid)
        walk = np.concatenate([np.zeros((1, group.dim)), np.cumsum(xi, axis=0)])
        paths.append(pf.DiscretePath(group, group.exp(walk)))
    return pf.EmpiricalMeasure.uniform(paths)


def brute_force_assignment(cost):
    """Enumerate all permutations; the oracle for uniform instances.

    Uses the same evaluation expression as the solver so exact equality
    of the optimal value is meaningful."""
    from itertools import permutations

    c = np.asarray(cost)
    n = c.shape[0]
    w = np.full(n, 1.0 / n)
    idx = np.arange(n)
    best_value = np.inf
    best_perm = None
    for perm in permutations(range(n)):
        perm = np.asarray(perm)
        value = float(np.sum(c[idx, perm] * w[idx]))
        if value < best_value:
            best_value = value
            best_perm = perm
    return best_perm, best_value
