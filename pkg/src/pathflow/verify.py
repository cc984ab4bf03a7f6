"""Seeded verification suites behind ``pathflow verify``.

Each suite builds deterministic instances from a seed, measures the
relevant identities and invariants, and returns a report dict

    {"suite": ..., "format_version": 1, "config": {...}, "passed": bool,
     "checks": [{"name", "measured", "tolerance", "passed"}, ...]}

where "measured" is the worst observed slack, so the reports double as
regression logs.  The acceptance test module drives the same functions
at their default (full-size) parameters.
"""

import itertools

import numpy as np

from .groups import (
    SO3,
    Heisenberg,
    HeisenbergGeodesicParams,
    Torus,
    heisenberg_geodesic,
    heisenberg_geodesic_velocity,
    integrate_geodesic,
)
from .ot import (
    assignment_margin,
    cost_matrix,
    dual_from_primal,
    lipschitz_check,
    solve_exact,
)
from .paths import (
    EmpiricalMeasure,
    cameron_martin_distance,
    l2_distance,
    sample_brownian_path,
    sample_loop,
    trapezoid_weights,
    uniform_distance,
)
from .transport import (
    directional_derivative,
    displacement_field,
    displacement_interpolation,
    has_cut_pair,
    interpolate_path,
    potential_gradient,
    reconstruct_geodesic_from_velocity,
    reconstruct_map,
)

FORMAT_VERSION = 1


def _rng(seed, *branch):
    return np.random.default_rng([int(seed)] + [int(b) for b in branch])


def brownian_bundle(group, grid, atoms, rng):
    return EmpiricalMeasure.uniform(
        [sample_brownian_path(group, grid, rng) for _ in range(atoms)]
    )


def loop_bundle(group, grid, atoms, rng, method):
    return EmpiricalMeasure.uniform(
        [sample_loop(group, grid, rng, method=method) for _ in range(atoms)]
    )


def _check(name, measured, tolerance):
    return {
        "name": name,
        "measured": float(measured),
        "tolerance": float(tolerance),
        "passed": bool(measured <= tolerance),
    }


def _report(suite, config, checks):
    return {
        "suite": suite,
        "format_version": FORMAT_VERSION,
        "config": config,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }


# ---------------------------------------------------------------------------
# duality


def duality_instances(seed=0, count=50, grid=16):
    """The canonical duality corpus: both groups, n = m in {4, 8, 16},
    exponents {1.5, 2, 3}, cycled over ``count`` seeded instances."""
    combos = list(itertools.product([Torus(2), SO3()], [4, 8, 16], [1.5, 2.0, 3.0]))
    for idx in range(count):
        group, atoms, p = combos[idx % len(combos)]
        rng = _rng(seed, 1, idx)
        src = brownian_bundle(group, grid, atoms, rng)
        tgt = brownian_bundle(group, grid, atoms, rng)
        yield group, p, src, tgt


def run_duality(seed=0, count=50, grid=16):
    max_rel_gap = 0.0
    max_feas = 0.0
    max_lip_excess = 0.0
    for group, p, src, tgt in duality_instances(seed, count, grid):
        cost = cost_matrix(src, tgt, p)
        coupling, value = solve_exact(cost, src.weights, tgt.weights)
        duals = dual_from_primal(cost, coupling)
        dual_value = duals.value(src.weights, tgt.weights)
        max_rel_gap = max(max_rel_gap, abs(value - dual_value) / max(value, 1e-300))
        max_feas = max(max_feas, duals.feasibility_gap(cost))
        report = lipschitz_check(duals.phi, src, p)
        max_lip_excess = max(max_lip_excess, report.max_ratio - report.bound)
    return {
        "max_relative_duality_gap": max_rel_gap,
        "max_feasibility_gap": max_feas,
        "max_lipschitz_excess": max_lip_excess,
    }


def suite_duality(config):
    seed = config.get("seed", 0)
    out = run_duality(seed=seed)
    checks = [
        _check("relative duality gap", out["max_relative_duality_gap"], 1e-8),
        _check("dual feasibility gap", out["max_feasibility_gap"], 1e-9),
        _check("lipschitz ratio excess", out["max_lipschitz_excess"], 1e-9),
    ]
    return _report("duality", config, checks)


# ---------------------------------------------------------------------------
# geodesic ODE vs one-parameter subgroups


def run_geodesic_ode(seed=0, count=100, steps=1000, speed_cap=2.0):
    group = SO3()
    rng = _rng(seed, 2)
    worst = 0.0
    for _ in range(count):
        direction = rng.standard_normal(3)
        direction /= np.linalg.norm(direction)
        x0 = direction * rng.uniform(0.0, speed_cap)
        endpoint = integrate_geodesic(group, group.identity(), x0, steps)[-1]
        worst = max(worst, float(np.max(np.abs(endpoint - group.exp(x0)))))
    torus = Torus(2)
    x0 = np.array([0.7, -0.4])
    end_t = integrate_geodesic(torus, torus.identity(), x0, steps)[-1]
    worst_torus = float(np.max(np.abs(end_t - torus.exp(x0))))
    return {"max_endpoint_error": worst, "max_torus_error": worst_torus}


def suite_geodesic_ode(config):
    out = run_geodesic_ode(seed=config.get("seed", 0))
    checks = [
        _check("rotation ODE endpoint error", out["max_endpoint_error"], 1e-6),
        _check("torus ODE endpoint error", out["max_torus_error"], 1e-9),
    ]
    return _report("geodesic-ode", config, checks)


# ---------------------------------------------------------------------------
# gradient identity


def gradient_identity_cases(seed=0, grid=16):
    """Dirac-target and strict-assignment cases for each exponent.

    Yields (tgt, psi, p, path, matched_target) tuples at which the
    c-transform potential is differentiable with a safe argmin margin."""
    from .transport import ctransform_argmin_gap

    for pi, p in enumerate([1.5, 2.0, 3.0]):
        for group in (Torus(2), SO3()):
            rng = _rng(seed, 3, pi, 0 if isinstance(group, Torus) else 1)
            # Dirac target
            sigma = sample_brownian_path(group, grid, rng)
            tgt = EmpiricalMeasure.uniform([sigma])
            path = sample_brownian_path(group, grid, rng)
            yield tgt, np.zeros(1), p, path, sigma
            # strict assignment instance, skipping thin argmin margins
            for attempt in range(50):
                src = brownian_bundle(group, grid, 4, rng)
                tgt = brownian_bundle(group, grid, 4, rng)
                cost = cost_matrix(src, tgt, p)
                coupling, _ = solve_exact(cost, src.weights, tgt.weights)
                duals = dual_from_primal(cost, coupling)
                perm = coupling.permutation()
                path = src.support[0]
                if ctransform_argmin_gap(tgt, duals.psi, p, path) > 1e-3:
                    if not has_cut_pair(path, tgt.support[perm[0]]):
                        yield tgt, duals.psi, p, path, tgt.support[perm[0]]
                        break


def gradient_identity_error(tgt, psi, p, path, matched, step):
    """Worst finite-difference mismatch against the displacement pairing,
    relative to the largest pairing value over the hat basis."""
    from .paths import hat_basis

    field = displacement_field(path, matched)
    w = trapezoid_weights(path.grid_size)
    d = l2_distance(path, matched)
    basis = hat_basis(path.grid_size, path.group.dim)
    expected = np.array(
        [
            -p * d ** (p - 2.0) * float(np.sum(w[:, None] * field.vectors * h.values))
            for h in basis
        ]
    )
    measured = np.array(
        [directional_derivative(tgt, psi, p, path, h, step) for h in basis]
    )
    scale = max(np.max(np.abs(expected)), 1e-12)
    return float(np.max(np.abs(measured - expected)) / scale)


def run_gradient_identity(seed=0, grid=16, steps=(1e-4, 1e-5)):
    errors = {step: 0.0 for step in steps}
    per_case = []
    for tgt, psi, p, path, matched in gradient_identity_cases(seed, grid):
        case_err = {}
        for step in steps:
            err = gradient_identity_error(tgt, psi, p, path, matched, step)
            errors[step] = max(errors[step], err)
            case_err[step] = err
        per_case.append(case_err)
    return {"max_error_by_step": errors, "per_case": per_case}


def suite_gradient_identity(config):
    out = run_gradient_identity(seed=config.get("seed", 0))
    errs = out["max_error_by_step"]
    steps = sorted(errs, reverse=True)
    regress = max(
        (case[steps[1]] - case[steps[0]] for case in out["per_case"]), default=0.0
    )
    checks = [
        _check("relative identity error at 1e-4", errs[steps[0]], 1e-2),
        _check("refinement regression", max(regress, 0.0), 0.0),
    ]
    return _report("gradient-identity", config, checks)


# ---------------------------------------------------------------------------
# distance chain


def run_distance_chain(seed=0, pairs=500, grid=32):
    worst = 0.0
    bound_excess = 0.0
    for gi, group in enumerate((Torus(1), Torus(2), SO3())):
        rng = _rng(seed, 4, gi)
        for _ in range(pairs):
            p1 = sample_brownian_path(group, grid, rng)
            p2 = sample_brownian_path(group, grid, rng)
            d2 = l2_distance(p1, p2)
            dinf = uniform_distance(p1, p2)
            dcm = cameron_martin_distance(p1, p2)
            worst = max(worst, d2 - dinf, dinf - dcm)
            bound_excess = max(bound_excess, d2 - group.diameter)
    return {"max_chain_violation": worst, "max_diameter_excess": bound_excess}


def suite_distance_chain(config):
    out = run_distance_chain(seed=config.get("seed", 0))
    checks = [
        _check("chain ordering violation", out["max_chain_violation"], 1e-9),
        _check("diameter bound excess", out["max_diameter_excess"], 1e-9),
    ]
    return _report("distance-chain", config, checks)


# ---------------------------------------------------------------------------
# geodesic scaling, path level and measure level


def run_path_scaling(seed=0, pairs=500, grid=16):
    worst = 0.0
    lams = (0.25, 0.5, 0.75)
    groups = (Torus(1), Torus(2), SO3())
    rng = _rng(seed, 5)
    done = 0
    while done < pairs:
        group = groups[done % len(groups)]
        p1 = sample_brownian_path(group, grid, rng)
        p2 = sample_brownian_path(group, grid, rng)
        if has_cut_pair(p1, p2):
            continue
        base = l2_distance(p1, p2)
        for lam in lams:
            mid = interpolate_path(p1, p2, lam)
            worst = max(
                worst,
                abs(l2_distance(p1, mid) - lam * base),
                abs(l2_distance(mid, p2) - (1.0 - lam) * base),
            )
        done += 1
    return {"max_scaling_error": worst}


def measure_scaling_instances(seed=0, count=20, grid=16, atoms=8):
    """Generic (cut-pair-free) transport instances for the measure-level
    geodesic check."""
    produced = 0
    idx = 0
    while produced < count:
        group = Torus(2) if idx % 2 == 0 else SO3()
        rng = _rng(seed, 6, idx)
        idx += 1
        src = brownian_bundle(group, grid, atoms, rng)
        tgt = brownian_bundle(group, grid, atoms, rng)
        cost = cost_matrix(src, tgt, 2.0)
        coupling, value = solve_exact(cost, src.weights, tgt.weights)
        flagged = any(
            has_cut_pair(src.support[i], tgt.support[j])
            for i, j in coupling.support()
        )
        if flagged:
            continue
        produced += 1
        yield src, tgt, coupling, value


def run_measure_scaling(seed=0, count=20, grid=16, atoms=8):
    lams = (0.25, 0.5, 0.75)
    worst = 0.0
    for src, tgt, coupling, value in measure_scaling_instances(seed, count, grid, atoms):
        w2 = float(np.sqrt(value))
        result = displacement_interpolation(src, tgt, coupling, lams)
        for lam, nu, dist in zip(result.lambdas, result.measures, result.distances):
            worst = max(worst, abs(dist - lam * w2) / w2)
            cost_back = cost_matrix(nu, tgt, 2.0)
            _, val_back = solve_exact(cost_back, nu.weights, tgt.weights)
            worst = max(worst, abs(float(np.sqrt(val_back)) - (1.0 - lam) * w2) / w2)
    return {"max_relative_scaling_error": worst}


def suite_scaling(config):
    seed = config.get("seed", 0)
    path_out = run_path_scaling(seed=seed)
    measure_out = run_measure_scaling(seed=seed)
    checks = [
        _check("path-level scaling error", path_out["max_scaling_error"], 1e-10),
        _check(
            "measure-level relative scaling error",
            measure_out["max_relative_scaling_error"],
            1e-8,
        ),
    ]
    return _report("scaling", config, checks)


# ---------------------------------------------------------------------------
# reconstruction of maps and geodesics


def run_map_reconstruction(seed=0, grid=32, steps=(1e-3, 5e-4, 2.5e-4, 1.25e-4, 1e-4)):
    """Torus reconstruction error against the assigned target per step.

    Cases: two Dirac-target instances plus one strict-assignment instance
    (source atom 0 against its matched target under the optimal plan)."""
    group = Torus(2)
    cases = []
    for branch in (0, 1):
        rng = _rng(seed, 7, branch)
        sigma = sample_brownian_path(group, grid, rng)
        path = sample_brownian_path(group, grid, rng)
        cases.append((EmpiricalMeasure.uniform([sigma]), np.zeros(1), path, sigma))
    rng = _rng(seed, 7, 2)
    src = brownian_bundle(group, grid, 4, rng)
    tgt = brownian_bundle(group, grid, 4, rng)
    cost = cost_matrix(src, tgt, 2.0)
    coupling, _ = solve_exact(cost, src.weights, tgt.weights)
    duals = dual_from_primal(cost, coupling)
    matched = tgt.support[coupling.permutation()[0]]
    cases.append((tgt, duals.psi, src.support[0], matched))

    errors = []
    for step in steps:
        worst = 0.0
        for measure, psi, path, target in cases:
            grad = potential_gradient(measure, psi, 2.0, path, step=step)
            recon = reconstruct_map(grad, path)
            gap = group.distance(recon.points[1:-1], target.points[1:-1])
            worst = max(worst, float(np.max(gap)))
        errors.append(worst)
    return {"steps": list(steps), "errors": errors}


def run_velocity_reconstruction(seed=0, count=200, steps=1000, grid=8):
    groups = (Torus(2), SO3(), Heisenberg(1))
    rng = _rng(seed, 8)
    worst_inverse = 0.0
    for i in range(count):
        group = groups[i % len(groups)]
        vec = rng.standard_normal(group.dim)
        if group.tag != "heisenberg":
            # keep strictly inside the injectivity radius
            vec *= rng.uniform(0.0, np.pi * 0.999) / np.linalg.norm(vec)
        curve = reconstruct_geodesic_from_velocity(group, vec, steps)
        residual = group.mul(curve[0], group.exp(vec))
        worst_inverse = max(
            worst_inverse, float(np.max(np.abs(residual - group.identity())))
        )
    # composition with displacement fields
    worst_roundtrip = 0.0
    for gi, group in enumerate((Torus(2), SO3())):
        rng = _rng(seed, 9, gi)
        p1 = sample_brownian_path(group, grid, rng)
        p2 = sample_brownian_path(group, grid, rng)
        field = displacement_field(p1, p2)
        expected = group.mul(group.inv(p2.points), p1.points)
        for k in range(grid + 1):
            curve = reconstruct_geodesic_from_velocity(group, field.vectors[k], 200)
            worst_roundtrip = max(
                worst_roundtrip, float(np.max(np.abs(curve[0] - expected[k])))
            )
    return {"max_inverse_error": worst_inverse, "max_roundtrip_error": worst_roundtrip}


def suite_reconstruction(config):
    seed = config.get("seed", 0)
    map_out = run_map_reconstruction(seed=seed)
    vel_out = run_velocity_reconstruction(seed=seed)
    errors = map_out["errors"]
    monotone_excess = max(
        [errors[i + 1] - errors[i] for i in range(len(errors) - 1)], default=0.0
    )
    checks = [
        _check("map recovery error at step 1e-4", errors[-1], 1e-3),
        _check("map error monotonicity excess", max(monotone_excess, 0.0), 0.0),
        _check("velocity inverse error", vel_out["max_inverse_error"], 1e-8),
        _check("velocity roundtrip error", vel_out["max_roundtrip_error"], 1e-8),
    ]
    return _report("reconstruction", config, checks)


# ---------------------------------------------------------------------------
# reversibility of optimal assignments between loop bundles


def run_reversibility(seed=0, count=20, grid=16, atoms=16, p=2.0):
    group = Torus(2)
    produced = 0
    idx = 0
    failures = 0
    min_margin = np.inf
    while produced < count:
        rng = _rng(seed, 10, idx)
        idx += 1
        src = loop_bundle(group, grid, atoms, rng, "geodesic-correction")
        tgt = loop_bundle(group, grid, atoms, rng, "torus-bridge")
        cost = cost_matrix(src, tgt, p)
        margin = assignment_margin(cost.entries)
        if margin < 1e-9:
            continue
        min_margin = min(min_margin, margin)
        forward, _ = solve_exact(cost, src.weights, tgt.weights)
        cost_back = cost_matrix(tgt, src, p)
        backward, _ = solve_exact(cost_back, tgt.weights, src.weights)
        pi_fwd = forward.permutation()
        pi_bwd = backward.permutation()
        if not np.array_equal(pi_bwd[pi_fwd], np.arange(atoms)):
            failures += 1
        produced += 1
    return {"composition_failures": failures, "min_margin": float(min_margin)}


def suite_reversibility(config):
    out = run_reversibility(seed=config.get("seed", 0))
    checks = [_check("composition identity failures", out["composition_failures"], 0.0)]
    return _report("reversibility", config, checks)


# ---------------------------------------------------------------------------
# Heisenberg geodesics


def run_heisenberg(seed=0, targets=(0.1, 1.0, 4.0), draws=20, speed_samples=100):
    rng = _rng(seed, 11)
    worst_endpoint = 0.0
    worst_speed = 0.0
    for t_target in targets:
        for _ in range(draws):
            n = int(rng.integers(1, 3))
            z = rng.standard_normal(2 * n)
            z /= np.linalg.norm(z)
            params = HeisenbergGeodesicParams(
                z[:n], z[n:], 2.0 * np.pi, float(np.sqrt(np.pi * t_target))
            )
            end = heisenberg_geodesic(params, params.r)
            expected = np.zeros(2 * n + 1)
            expected[-1] = t_target
            worst_endpoint = max(worst_endpoint, float(np.max(np.abs(end - expected))))
            s = np.linspace(0.0, params.r, speed_samples)
            vel = heisenberg_geodesic_velocity(params, s)
            speed = np.sqrt(np.sum(vel[:, : 2 * n] ** 2, axis=1))
            worst_speed = max(worst_speed, float(np.max(np.abs(speed - 1.0))))
    return {"max_endpoint_error": worst_endpoint, "max_speed_error": worst_speed}


def suite_heisenberg(config):
    out = run_heisenberg(seed=config.get("seed", 0))
    checks = [
        _check("vertical endpoint error", out["max_endpoint_error"], 1e-10),
        _check("horizontal speed error", out["max_speed_error"], 1e-10),
    ]
    return _report("heisenberg", config, checks)


SUITES = {
    "duality": suite_duality,
    "geodesic-ode": suite_geodesic_ode,
    "gradient-identity": suite_gradient_identity,
    "distance-chain": suite_distance_chain,
    "scaling": suite_scaling,
    "reconstruction": suite_reconstruction,
    "reversibility": suite_reversibility,
    "heisenberg": suite_heisenberg,
}


def run_suite(name, config):
    if name not in SUITES:
        raise ValueError(
            f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}"
        )
    return SUITES[name](dict(config))
