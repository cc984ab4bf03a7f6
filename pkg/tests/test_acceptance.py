"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
measurements.  Every tolerance is fixed here; nothing is deferred to
later calibration.
"""

import numpy as np

import pathflow as pf
from pathflow import verify

from conftest import brownian_bundle, brute_force_assignment


def report(criterion, passed, detail):
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
    assert passed, f"criterion {criterion}: {detail}"


def test_criterion_1_strong_duality():
    # 50 seeded instances over torus(2) and so3, n = m in {4, 8, 16},
    # p in {1.5, 2, 3}: primal equals dual within 1e-8 relative
    out = verify.run_duality(seed=0, count=50, grid=16)
    gap = out["max_relative_duality_gap"]
    feas = out["max_feasibility_gap"]
    report(1, gap <= 1e-8 and feas <= 1e-9,
           f"max relative duality gap {gap:.3e} (tol 1e-8), "
           f"max feasibility gap {feas:.3e} (tol 1e-9)")


def test_criterion_2_measure_geodesic_scaling():
    # 20 generic instances, lambda in {0.25, 0.5, 0.75}: both legs of the
    # geodesic identity within 1e-8 relative
    out = verify.run_measure_scaling(seed=0, count=20, grid=16, atoms=8)
    err = out["max_relative_scaling_error"]
    report(2, err <= 1e-8, f"max relative scaling error {err:.3e} (tol 1e-8)")


def test_criterion_3_path_level_scaling():
    # 500 random pairs: d_L2(gamma1, u_lambda) = lambda d_L2 within 1e-10
    out = verify.run_path_scaling(seed=0, pairs=500, grid=16)
    err = out["max_scaling_error"]
    report(3, err <= 1e-10, f"max absolute scaling error {err:.3e} (tol 1e-10)")


def test_criterion_4_gradient_identity():
    # directional derivatives of the c-transform potential match
    # -p d^{p-2} sum_k w_k <V_k, h_k> within 1e-2 relative at step 1e-4,
    # improving at step 1e-5
    out = verify.run_gradient_identity(seed=0, grid=16, steps=(1e-4, 1e-5))
    errs = out["max_error_by_step"]
    improving = all(case[1e-5] <= case[1e-4] for case in out["per_case"])
    report(4, errs[1e-4] <= 1e-2 and improving,
           f"max relative error {errs[1e-4]:.3e} at step 1e-4 (tol 1e-2), "
           f"{errs[1e-5]:.3e} at 1e-5, improving={improving}")


def test_criterion_5_explicit_map_reconstruction():
    # torus instances, N = 32: interior-node recovery within 1e-3 at step
    # 1e-4, error decreasing monotonically as the step halves from 1e-3
    out = verify.run_map_reconstruction(seed=0, grid=32)
    errors = out["errors"]
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    report(5, errors[-1] <= 1e-3 and monotone,
           f"recovery errors {['%.2e' % e for e in errors]} over steps "
           f"{out['steps']}, final tol 1e-3, monotone={monotone}")


def test_criterion_6_geodesic_reconstruction_from_velocity():
    # 200 random draws: ODE-reconstructed v(0) inverts exp within 1e-8 and
    # composes with displacement fields to gamma2^{-1} gamma1 within 1e-8
    out = verify.run_velocity_reconstruction(seed=0, count=200, steps=1000)
    inv_err = out["max_inverse_error"]
    rt_err = out["max_roundtrip_error"]
    report(6, inv_err <= 1e-8 and rt_err <= 1e-8,
           f"max inverse error {inv_err:.3e}, roundtrip error {rt_err:.3e} "
           f"(tol 1e-8)")


def test_criterion_7_geodesic_ode_vs_subgroups():
    # bi-invariant so3, 1000 RK4 steps, 100 velocities with |X0| <= 2
    out = verify.run_geodesic_ode(seed=0, count=100, steps=1000, speed_cap=2.0)
    err = out["max_endpoint_error"]
    report(7, err <= 1e-6, f"max ODE endpoint error {err:.3e} (tol 1e-6)")


def test_criterion_8_distance_chain():
    # 500 pairs per group: d_L2 <= d_inf <= d_CM with slack <= 1e-9
    out = verify.run_distance_chain(seed=0, pairs=500, grid=32)
    slack = out["max_chain_violation"]
    report(8, slack <= 1e-9, f"max chain violation {slack:.3e} (tol 1e-9)")


def test_criterion_9_lipschitz_bound():
    # every duality instance satisfies the pairwise ratio bound p D^{p-1}
    out = verify.run_duality(seed=0, count=50, grid=16)
    excess = out["max_lipschitz_excess"]
    report(9, excess <= 1e-9,
           f"max ratio excess over p*D^(p-1) is {excess:.3e} (tol 1e-9)")


def test_criterion_10_heisenberg_geodesics():
    # vertical targets t in {0.1, 1, 4}, 20 random unit parameters:
    # endpoint (0, 0, t) within 1e-10, horizontal speed 1 within 1e-10
    out = verify.run_heisenberg(seed=0, targets=(0.1, 1.0, 4.0), draws=20,
                                speed_samples=100)
    e1, e2 = out["max_endpoint_error"], out["max_speed_error"]
    report(10, e1 <= 1e-10 and e2 <= 1e-10,
           f"max endpoint error {e1:.3e}, max speed error {e2:.3e} (tol 1e-10)")


def test_criterion_11_reversibility():
    # 20 loop-bundle pairs (n = 16, strict optima): the two optimal
    # assignments compose to the identity permutation exactly
    out = verify.run_reversibility(seed=0, count=20, grid=16, atoms=16)
    fails = out["composition_failures"]
    report(11, fails == 0,
           f"{fails} composition failures over 20 strict instances "
           f"(min margin {out['min_margin']:.3e})")


def test_criterion_12_exact_solver_oracle():
    # every 3x3 and 4x4 uniform instance in the corpus: solver value equals
    # the brute-force minimum over permutations exactly
    mismatches = 0
    total = 0
    for group in (pf.Torus(2), pf.SO3()):
        for atoms in (3, 4):
            for p in (1.5, 2.0, 3.0):
                for seed in range(5):
                    rng = np.random.default_rng([50, total, seed])
                    src = brownian_bundle(group, 8, atoms, rng)
                    tgt = brownian_bundle(group, 8, atoms, rng)
                    cost = pf.cost_matrix(src, tgt, p)
                    _, value = pf.solve_exact(cost, src.weights, tgt.weights)
                    _, oracle = brute_force_assignment(cost.entries)
                    total += 1
                    if value != oracle:
                        mismatches += 1
    rng = np.random.default_rng(99)
    for n in (3, 4):
        for _ in range(40):
            c = rng.uniform(0.0, 2.0, size=(n, n))
            cost = pf.CostMatrix(c, 2.0)
            w = np.full(n, 1.0 / n)
            _, value = pf.solve_exact(cost, w, w)
            _, oracle = brute_force_assignment(c)
            total += 1
            if value != oracle:
                mismatches += 1
    report(12, mismatches == 0,
           f"{mismatches} mismatches against brute force over {total} instances")
