"""Agreement between the numba kernels and their numpy fallbacks."""

import numpy as np
import pytest

import pathflow as pf
from pathflow import _accel_np as np_impl

nb_impl = pytest.importorskip("pathflow._accel_nb")

from conftest import brownian_bundle


def rotation_sample(rng, count):
    coords = rng.standard_normal((count, 3))
    norms = np.linalg.norm(coords, axis=1, keepdims=True)
    scales = rng.uniform(0.0, np.pi, size=(count, 1))
    coords = coords / norms * scales
    # cover the guard branches
    coords[0] = 0.0
    coords[1] = np.array([1e-6, 0.0, 0.0])
    coords[2] = np.array([0.0, np.pi - 1e-7, 0.0])
    coords[3] = np.array([0.0, 0.0, np.pi])
    return coords


class TestBatchKernels:
    def test_exp_agreement(self):
        coords = rotation_sample(np.random.default_rng(0), 200)
        a = np_impl.so3_exp_batch(coords)
        b = nb_impl.so3_exp_batch(coords)
        assert np.max(np.abs(a - b)) <= 1e-14

    def test_log_agreement(self):
        coords = rotation_sample(np.random.default_rng(1), 200)
        rots = np_impl.so3_exp_batch(coords)
        a = np_impl.so3_log_batch(rots)
        b = nb_impl.so3_log_batch(np.ascontiguousarray(rots))
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_angle_agreement(self):
        rng = np.random.default_rng(2)
        r1 = np_impl.so3_exp_batch(rotation_sample(rng, 100))
        r2 = np_impl.so3_exp_batch(rotation_sample(rng, 100))
        a = np_impl.so3_angle_batch(r1, r2)
        b = nb_impl.so3_angle_batch(r1, r2)
        assert np.max(np.abs(a - b)) <= 1e-12


class TestCostKernels:
    def test_torus_cost_agreement(self):
        rng = np.random.default_rng(3)
        src = brownian_bundle(pf.Torus(3), 12, 6, rng).stacked_points()
        tgt = brownian_bundle(pf.Torus(3), 12, 5, rng).stacked_points()
        w = pf.trapezoid_weights(12)
        for p in (1.5, 2.0, 3.0):
            a = np_impl.torus_cost_matrix(src, tgt, w, p)
            b = nb_impl.torus_cost_matrix(src, tgt, w, p)
            assert np.max(np.abs(a - b)) <= 1e-12

    def test_so3_cost_agreement(self):
        rng = np.random.default_rng(4)
        src = brownian_bundle(pf.SO3(), 12, 6, rng).stacked_points()
        tgt = brownian_bundle(pf.SO3(), 12, 5, rng).stacked_points()
        w = pf.trapezoid_weights(12)
        for p in (1.5, 2.0, 3.0):
            a = np_impl.so3_cost_matrix(src, tgt, w, p)
            b = nb_impl.so3_cost_matrix(src, tgt, w, p)
            assert np.max(np.abs(a - b)) <= 1e-12


class TestSinkhornKernel:
    def test_fixed_iteration_agreement(self):
        rng = np.random.default_rng(5)
        cost = rng.uniform(0.0, 2.0, size=(6, 7))
        a = rng.uniform(0.5, 1.5, size=6)
        a /= a.sum()
        b = rng.uniform(0.5, 1.5, size=7)
        b /= b.sum()
        f0 = np.zeros(6)
        g0 = np.zeros(7)
        out_np = np_impl.sinkhorn_log(cost, a, b, 0.1, 500, 0.0, f0, g0)
        out_nb = nb_impl.sinkhorn_log(cost, a, b, 0.1, 500, 0.0, f0, g0)
        assert out_np[2] == out_nb[2]
        assert np.max(np.abs(out_np[0] - out_nb[0])) <= 1e-9
        assert np.max(np.abs(out_np[1] - out_nb[1])) <= 1e-9
        assert abs(out_np[3] - out_nb[3]) <= 1e-12

    def test_warm_start_is_used(self):
        rng = np.random.default_rng(6)
        cost = rng.uniform(0.0, 1.0, size=(4, 4))
        w = np.full(4, 0.25)
        f1, g1, _, _ = np_impl.sinkhorn_log(cost, w, w, 0.5, 200, 1e-12,
                                            np.zeros(4), np.zeros(4))
        f2, g2, it, _ = np_impl.sinkhorn_log(cost, w, w, 0.5, 200, 1e-12, f1, g1)
        assert it <= 2  # already converged


class TestBackendSelection:
    def test_reported_backend_is_valid(self):
        assert pf.backend() in ("numba", "numpy")

    def test_env_flag_forces_numpy(self):
        import subprocess
        import sys

        out = subprocess.run(
            [sys.executable, "-c", "import pathflow; print(pathflow.backend())"],
            env={"PATH": "/usr/bin:/bin", "PATHFLOW_BACKEND": "numpy"},
            capture_output=True,
            text=True,
        )
        assert out.stdout.strip() == "numpy"

    def test_invalid_flag_rejected(self):
        import subprocess
        import sys

        out = subprocess.run(
            [sys.executable, "-c", "import pathflow"],
            env={"PATH": "/usr/bin:/bin", "PATHFLOW_BACKEND": "sundials"},
            capture_output=True,
            text=True,
        )
        assert out.returncode != 0
