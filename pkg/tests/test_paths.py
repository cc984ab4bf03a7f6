import numpy as np
import pytest

import pathflow as pf
from pathflow.paths import GridMismatchError, check_compatible


PI = np.pi


def constant_offset_pair(grid, offset):
    """A pair at constant node distance ``offset`` away from t = 0.

    Both paths must start at the identity, so the node-0 distance is
    forcibly zero; the offset applies from the first interior node on."""
    t = pf.Torus(1)
    base = np.linspace(0.0, 0.9, grid + 1)[:, None]
    base[0] = 0.0
    p1 = pf.DiscretePath(t, t.exp(base))
    shifted = t.mul(p1.points, np.array([offset]))
    shifted[0] = 0.0
    p2 = pf.DiscretePath(t, shifted)
    return p1, p2


class TestPathTypes:
    def test_path_must_start_at_identity(self):
        t = pf.Torus(1)
        with pytest.raises(ValueError):
            pf.DiscretePath(t, np.array([[0.1], [0.2]]))

    def test_loop_endpoint_tolerance(self):
        t = pf.Torus(1)
        pts = np.zeros((5, 1))
        pts[-1, 0] = 1e-10
        with pytest.raises(ValueError):
            pf.DiscreteLoop(t, pts)
        pts[-1, 0] = 0.0
        pf.DiscreteLoop(t, pts)

    def test_points_are_immutable(self):
        p = pf.sample_brownian_path(pf.Torus(2), 8, 0)
        with pytest.raises(ValueError):
            p.points[0, 0] = 1.0

    def test_measure_validation(self):
        t = pf.Torus(1)
        paths = [pf.sample_brownian_path(t, 8, s) for s in range(3)]
        with pytest.raises(ValueError):
            pf.EmpiricalMeasure(tuple(paths), np.array([0.5, 0.5, 0.5]))
        with pytest.raises(ValueError):
            pf.EmpiricalMeasure(tuple(paths), np.array([0.5, 0.5, 0.0]))
        mixed = paths[:2] + [pf.sample_brownian_path(t, 4, 0)]
        with pytest.raises(GridMismatchError):
            pf.EmpiricalMeasure(tuple(mixed), np.full(3, 1 / 3))


class TestDistances:
    def test_zero_on_equal_paths(self):
        p = pf.sample_brownian_path(pf.SO3(), 12, 0)
        assert pf.uniform_distance(p, p) == 0.0
        assert pf.l2_distance(p, p) == 0.0
        assert pf.cameron_martin_distance(p, p) <= 1e-12

    def test_constant_offset_gives_offset(self):
        # node 0 is pinned at the identity, so the L2 value loses exactly
        # the node-0 trapezoid weight: c * sqrt(1 - 1/(2N))
        c, grid = 0.8, 10
        p1, p2 = constant_offset_pair(grid, c)
        assert abs(pf.uniform_distance(p1, p2) - c) <= 1e-12
        expected = c * np.sqrt(1.0 - 0.5 / grid)
        assert abs(pf.l2_distance(p1, p2) - expected) <= 1e-12

    def test_l2_hand_quadrature(self):
        # node distances (0, 1, 2) on a 2-interval grid:
        # sqrt(0/4 + 1/2 + 4/4) = sqrt(1.5)
        t = pf.Torus(1)
        p1 = pf.DiscretePath(t, np.zeros((3, 1)))
        p2 = pf.DiscretePath(t, np.array([[0.0], [1.0], [2.0]]))
        assert abs(pf.l2_distance(p1, p2) - np.sqrt(1.5)) <= 1e-15

    def test_uniform_dominates_l2(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            p1 = pf.sample_brownian_path(pf.Torus(2), 16, rng)
            p2 = pf.sample_brownian_path(pf.Torus(2), 16, rng)
            assert pf.l2_distance(p1, p2) <= pf.uniform_distance(p1, p2) + 1e-12

    def test_cameron_martin_linear_body_velocity(self):
        c = 2.0
        t = pf.Torus(1)
        grid = 8
        times = np.linspace(0.0, 1.0, grid + 1)[:, None]
        p1 = pf.DiscretePath(t, np.zeros((grid + 1, 1)))
        p2 = pf.DiscretePath(t, t.exp(times * c))
        assert abs(pf.cameron_martin_distance(p1, p2) - c) <= 1e-12

    @pytest.mark.parametrize("group", [pf.Torus(1), pf.Torus(2), pf.SO3()])
    def test_distance_chain(self, group):
        rng = np.random.default_rng(2)
        for _ in range(50):
            p1 = pf.sample_brownian_path(group, 24, rng)
            p2 = pf.sample_brownian_path(group, 24, rng)
            d2 = pf.l2_distance(p1, p2)
            dinf = pf.uniform_distance(p1, p2)
            dcm = pf.cameron_martin_distance(p1, p2)
            assert d2 <= dinf + 1e-9
            assert dinf <= dcm + 1e-9
            assert d2 <= group.diameter + 1e-9

    @pytest.mark.parametrize("group", [pf.Torus(2), pf.SO3()])
    def test_left_invariance_on_the_grid(self, group):
        rng = np.random.default_rng(3)
        p1 = pf.sample_brownian_path(group, 16, rng)
        p2 = pf.sample_brownian_path(group, 16, rng)
        ell = pf.sample_brownian_path(group, 16, rng)
        t1 = pf.pointwise_product(ell, p1)
        t2 = pf.pointwise_product(ell, p2)
        assert abs(
            pf.cameron_martin_distance(t1, t2) - pf.cameron_martin_distance(p1, p2)
        ) <= 1e-10
        assert abs(pf.l2_distance(t1, t2) - pf.l2_distance(p1, p2)) <= 1e-10

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(4)
        paths = [pf.sample_brownian_path(pf.Torus(2), 8, rng) for _ in range(6)]
        for dist in (pf.uniform_distance, pf.l2_distance):
            for i in range(6):
                for j in range(6):
                    assert dist(paths[i], paths[j]) == dist(paths[j], paths[i])
        # the relative-path reversal reassociates float ops; symmetry of the
        # body energy is exact only to roundoff
        for i in range(6):
            for j in range(6):
                assert abs(
                    pf.cameron_martin_distance(paths[i], paths[j])
                    - pf.cameron_martin_distance(paths[j], paths[i])
                ) <= 1e-13
        for dist in (pf.uniform_distance, pf.l2_distance, pf.cameron_martin_distance):
            for i in range(6):
                for j in range(6):
                    for k in range(6):
                        assert dist(paths[i], paths[j]) <= (
                            dist(paths[i], paths[k]) + dist(paths[k], paths[j]) + 1e-9
                        )

    def test_grid_mismatch_raises(self):
        p1 = pf.sample_brownian_path(pf.Torus(1), 8, 0)
        p2 = pf.sample_brownian_path(pf.Torus(1), 4, 0)
        with pytest.raises(GridMismatchError):
            check_compatible(p1, p2)


class TestBrownianSampler:
    def test_determinism(self):
        a = pf.sample_brownian_path(pf.SO3(), 8, 42)
        b = pf.sample_brownian_path(pf.SO3(), 8, 42)
        assert np.array_equal(a.points, b.points)

    def test_single_increment_reproducible(self):
        g = pf.Torus(1)
        p = pf.sample_brownian_path(g, 1, 7)
        xi = np.random.default_rng(7).standard_normal((1, 1))
        assert np.array_equal(p.points[1], g.exp(xi[0]))

    def test_unwrapped_displacement_variance(self):
        # summed log-increments are N(0, 1); empirical variance within 5%
        g = pf.Torus(1)
        grid = 4
        totals = np.empty(10_000)
        for seed in range(totals.size):
            p = pf.sample_brownian_path(g, grid, seed)
            inc = g.log(g.mul(g.inv(p.points[:-1]), p.points[1:]))
            totals[seed] = inc.sum()
        assert abs(np.var(totals) - 1.0) <= 0.05

    def test_constant_identity_path_is_valid_degenerate_case(self):
        g = pf.Torus(2)
        p = pf.DiscretePath(g, np.zeros((9, 2)))
        assert pf.l2_distance(p, p) == 0.0


class TestLoopSampler:
    @pytest.mark.parametrize(
        "group,method",
        [
            (pf.Torus(2), "torus-bridge"),
            (pf.Torus(2), "geodesic-correction"),
            (pf.SO3(), "geodesic-correction"),
            (pf.Heisenberg(1), "geodesic-correction"),
        ],
    )
    def test_endpoint_is_identity(self, group, method):
        for seed in range(5):
            loop = pf.sample_loop(group, 12, seed, method=method)
            assert np.max(np.abs(loop.points[-1] - group.identity())) <= 1e-12

    def test_bridge_requires_torus(self):
        with pytest.raises(ValueError):
            pf.sample_loop(pf.SO3(), 8, 0, method="torus-bridge")

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            pf.sample_loop(pf.Torus(1), 8, 0, method="nope")

    def test_bridge_midpoint_variance(self):
        g = pf.Torus(1)
        mids = np.empty(10_000)
        for seed in range(mids.size):
            loop = pf.sample_loop(g, 2, seed, method="torus-bridge")
            mids[seed] = loop.points[1, 0]
        assert abs(np.var(mids) - 0.25) <= 0.05 * 0.25

    def test_geodesic_correction_formula(self):
        # deterministic contract: the corrected loop is the Brownian draw
        # slid back along the one-parameter subgroup of its endpoint
        g = pf.SO3()
        base = pf.sample_brownian_path(g, 10, 5)
        loop = pf.sample_loop(g, 10, 5, method="geodesic-correction")
        drift = g.log(base.points[-1])
        times = np.linspace(0.0, 1.0, 11)
        expected = g.mul(base.points, g.exp(-times[:, None] * drift))
        assert np.max(np.abs(loop.points - expected)) == 0.0

    def test_correction_fixes_existing_loops(self):
        g = pf.Torus(2)
        loop = pf.sample_loop(g, 8, 3, method="torus-bridge")
        drift = g.log(loop.points[-1])  # zero vector
        assert np.array_equal(drift, np.zeros(2))
        corrected = g.mul(loop.points, g.exp(-loop.times[:, None] * drift))
        assert np.array_equal(corrected, loop.points)


class TestCameronMartinVectors:
    def test_boundary_constraints(self):
        with pytest.raises(ValueError):
            pf.CameronMartinVector(np.ones((5, 2)))
        vals = np.zeros((5, 2))
        vals[-1] = 1.0
        with pytest.raises(ValueError):
            pf.CameronMartinVector(vals, loop=True)
        pf.CameronMartinVector(vals, loop=False)

    def test_h_norm_of_linear_ramp(self):
        grid = 8
        vals = np.linspace(0.0, 1.0, grid + 1)[:, None] * np.array([2.0])
        h = pf.CameronMartinVector(vals)
        assert abs(h.h_norm() - 2.0) <= 1e-12

    def test_hat_basis_spans_and_vanishes(self):
        basis = pf.hat_basis(6, 2)
        assert len(basis) == 10
        for h in basis:
            assert np.array_equal(h.values[0], np.zeros(2))
            assert np.array_equal(h.values[-1], np.zeros(2))
        # gram of circle hats: 2N diagonal, -N off-diagonal
        g00 = pf.h_inner(basis[0], basis[0])
        g02 = pf.h_inner(basis[0], basis[2])
        assert g00 == 12.0 and g02 == -6.0


class TestCylindricalGradient:
    def test_green_kernel_value(self):
        assert pf.green_kernel(0.25, 0.5) == 0.125

    def test_constant_function_has_zero_gradient(self):
        loop = pf.sample_loop(pf.Torus(1), 8, 0, method="torus-bridge")
        func = pf.CylindricalFunction((0.25, 0.5), lambda pts: 1.0)
        grad = pf.cylindrical_gradient(func, loop)
        assert np.max(np.abs(grad.values)) <= 1e-10
        assert grad.loop

    def test_single_slot_squared_distance(self):
        g = pf.Torus(1)
        grid = 8
        pts = np.zeros((grid + 1, 1))
        pts[4, 0] = 0.3  # value at theta = 0.5
        pts[2, 0] = 0.1
        pts[6, 0] = -0.2
        loop = pf.DiscreteLoop(g, pts)

        def f(points):
            return 0.5 * g.distance(g.identity(), points[0]) ** 2

        def grad(points):
            return np.array([[points[0][0]]])

        times = np.linspace(0.0, 1.0, grid + 1)
        expected = 0.3 * pf.green_kernel(0.5, times)[:, None]
        for func in (
            pf.CylindricalFunction((0.5,), f, grad=grad),
            pf.CylindricalFunction((0.5,), f),  # finite-difference fallback
        ):
            out = pf.cylindrical_gradient(func, loop)
            assert np.max(np.abs(out.values - expected)) <= 1e-9
            assert np.array_equal(out.values[0], np.zeros(1))
            assert np.array_equal(out.values[-1], np.zeros(1))

    def test_off_grid_time_raises(self):
        loop = pf.sample_loop(pf.Torus(1), 8, 0, method="torus-bridge")
        func = pf.CylindricalFunction((0.3,), lambda pts: 1.0)
        with pytest.raises(ValueError):
            pf.cylindrical_gradient(func, loop)

    def test_times_must_increase(self):
        with pytest.raises(ValueError):
            pf.CylindricalFunction((0.5, 0.25), lambda pts: 1.0)
