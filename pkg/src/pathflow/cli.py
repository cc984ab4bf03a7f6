"""Command-line front end.

Subcommands:

    pathflow sample       draw a measure of Brownian paths or pinned loops
                          and write it as a path-bundle JSON file
    pathflow transport    solve the transport problem between two bundles;
                          writes the coupling CSV, potentials JSON and a
                          report JSON
    pathflow interpolate  displacement interpolation between two bundles
                          at p = 2, one bundle per lambda plus a scaling
                          report
    pathflow verify       run a named verification suite and report
                          pass/fail per check

Exit codes: 0 success, 2 validation error, 3 solver failure,
4 verification failure.  Every command is deterministic given its flags
and seed.  The environment variable PATHFLOW_THREADS caps the kernel
worker count (default 1); PATHFLOW_BACKEND selects numba or numpy
kernels.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import accel
from .bundles import read_bundle, write_bundle
from .groups import group_from_tag
from .ot import (
    SinkhornError,
    SolverError,
    cost_matrix,
    dual_from_primal,
    lipschitz_check,
    solve_exact,
    solve_sinkhorn,
)
from .paths import EmpiricalMeasure, sample_brownian_path, sample_loop
from .transport import displacement_interpolation
from .verify import FORMAT_VERSION, run_suite

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


@dataclass(frozen=True)
class RunConfig:
    group: str
    dim: int
    grid: int
    atoms: int
    p: float
    solver: str
    epsilon: float
    seed: int

    def __post_init__(self):
        if self.grid < 4:
            raise ValueError("grid must be >= 4")
        if self.atoms < 1:
            raise ValueError("atoms must be >= 1")
        if not 1.0 < self.p <= 10.0:
            raise ValueError("exponent p must lie in (1, 10]")
        if self.solver not in ("exact", "sinkhorn"):
            raise ValueError("solver must be 'exact' or 'sinkhorn'")
        if self.solver == "sinkhorn" and not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive for the sinkhorn solver")


def _config_from_args(args):
    return RunConfig(
        group=args.group,
        dim=args.dim,
        grid=args.grid,
        atoms=args.atoms,
        p=args.p,
        solver=getattr(args, "solver", "exact"),
        epsilon=getattr(args, "epsilon", 1e-3),
        seed=args.seed,
    )


def _write_json(path, payload):
    text = json.dumps(payload, indent=1)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _default_dim(group_tag, dim):
    if dim is not None:
        return dim
    return {"torus": 2, "so3": 3, "heisenberg": 3}[group_tag]


def cmd_sample(args):
    config = _config_from_args(args)
    group = group_from_tag(config.group, _default_dim(config.group, args.dim))
    rng = np.random.default_rng(config.seed)
    paths = []
    for _ in range(config.atoms):
        if args.loops:
            paths.append(sample_loop(group, config.grid, rng, method=args.loop_method))
        else:
            paths.append(sample_brownian_path(group, config.grid, rng))
    write_bundle(args.out, EmpiricalMeasure.uniform(paths))
    return EXIT_OK


def _write_coupling_csv(path, coupling, cutoff=1e-15):
    lines = ["i,j,mass"]
    for i, j in np.argwhere(coupling.plan > cutoff):
        lines.append(f"{i},{j},{float(coupling.plan[i, j])!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_transport(args):
    src = read_bundle(args.source)
    tgt = read_bundle(args.target)
    cost = cost_matrix(src, tgt, args.p)
    if args.solver == "exact":
        coupling, value = solve_exact(cost, src.weights, tgt.weights)
        duals = dual_from_primal(cost, coupling)
    else:
        if not args.epsilon > 0.0:
            raise ValueError("epsilon must be positive for the sinkhorn solver")
        coupling, value, duals = solve_sinkhorn(
            cost, src.weights, tgt.weights, args.epsilon
        )
    dual_value = duals.value(src.weights, tgt.weights)
    lip = lipschitz_check(duals.phi, src, args.p)
    prefix = args.out
    _write_coupling_csv(prefix + ".coupling.csv", coupling)
    _write_json(
        prefix + ".potentials.json",
        {
            "format_version": FORMAT_VERSION,
            "p": args.p,
            "phi": [float(x) for x in duals.phi],
            "psi": [float(x) for x in duals.psi],
        },
    )
    report = {
        "format_version": FORMAT_VERSION,
        "config": {
            "source": args.source,
            "target": args.target,
            "p": args.p,
            "solver": args.solver,
            "epsilon": args.epsilon if args.solver == "sinkhorn" else None,
        },
        "primal_value": value,
        "dual_value": dual_value,
        "duality_gap": abs(value - dual_value),
        "wasserstein": value ** (1.0 / args.p),
        "lipschitz_max_ratio": lip.max_ratio,
        "lipschitz_bound": lip.bound,
        "lipschitz_ok": lip.satisfied,
    }
    _write_json(prefix + ".report.json", report)
    return EXIT_OK


def cmd_interpolate(args):
    src = read_bundle(args.source)
    tgt = read_bundle(args.target)
    lambdas = sorted(float(x) for x in args.lambdas.split(","))
    if any(l < 0.0 or l > 1.0 for l in lambdas):
        raise ValueError("interpolation parameters must lie in [0, 1]")
    cost = cost_matrix(src, tgt, 2.0)
    coupling, value = solve_exact(cost, src.weights, tgt.weights)
    w2 = float(np.sqrt(value))
    result = displacement_interpolation(src, tgt, coupling, lambdas)
    entries = []
    for lam, nu, dist in zip(result.lambdas, result.measures, result.distances):
        name = f"{args.out}.lambda-{lam:g}.json"
        write_bundle(name, nu)
        target = lam * w2
        ratio = 1.0 if target == 0.0 else dist / target
        entries.append(
            {"lambda": lam, "w2": dist, "target": target, "ratio": ratio, "bundle": name}
        )
    _write_json(
        args.out + ".scaling.json",
        {
            "format_version": FORMAT_VERSION,
            "config": {"source": args.source, "target": args.target, "p": 2.0},
            "w2_total": w2,
            "entries": entries,
        },
    )
    return EXIT_OK


def cmd_verify(args):
    config = {
        "seed": args.seed,
        "group": args.group,
        "dim": _default_dim(args.group, args.dim),
        "grid": args.grid,
        "atoms": args.atoms,
        "p": args.p,
        "epsilon": args.epsilon,
    }
    report = run_suite(args.suite, config)
    _write_json(args.out, report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pathflow",
        description="optimal transport between measures on discretized paths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, with_solver):
        sp.add_argument("--group", choices=["torus", "so3", "heisenberg"],
                        default="torus")
        sp.add_argument("--dim", type=int, default=None,
                        help="torus dimension / heisenberg coordinate count")
        sp.add_argument("--grid", type=int, default=16)
        sp.add_argument("--atoms", type=int, default=8)
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--epsilon", type=float, default=1e-3)
        if with_solver:
            sp.add_argument("--solver", choices=["exact", "sinkhorn"],
                            default="exact")

    sp = sub.add_parser("sample", help="sample a path or loop bundle")
    common(sp, with_solver=False)
    sp.add_argument("--loops", action="store_true")
    sp.add_argument("--loop-method", default="geodesic-correction",
                    choices=["geodesic-correction", "torus-bridge"])
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sample, needs_config=True)

    sp = sub.add_parser("transport", help="solve transport between two bundles")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--solver", choices=["exact", "sinkhorn"], default="exact")
    sp.add_argument("--epsilon", type=float, default=1e-3)
    sp.add_argument("--out", required=True, help="output file prefix")
    sp.set_defaults(func=cmd_transport, needs_config=False)

    sp = sub.add_parser("interpolate", help="displacement interpolation (p=2)")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--lambdas", default="0.25,0.5,0.75")
    sp.add_argument("--out", required=True, help="output file prefix")
    sp.set_defaults(func=cmd_interpolate, needs_config=False)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite")
    common(sp, with_solver=False)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_verify, needs_config=False)

    return parser


def main(argv=None):
    accel.set_worker_cap(os.environ.get("PATHFLOW_THREADS", 1))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if getattr(args, "needs_config", False):
            _config_from_args(args)
        return args.func(args)
    except (ValueError, FileNotFoundError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverError, SinkhornError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
