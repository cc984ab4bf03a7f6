"""Discrete Monge-Kantorovich solvers between empirical path measures.

Costs are powers of the L2 path distance.  The exact solver doubles as
the oracle for everything else: uniform equal-size instances go through
the Hungarian-style assignment solver, general marginals through the
HiGHS simplex on the transportation LP.  An entropic solver (log-domain
Sinkhorn) provides the approximation layer.

Dual potentials are recovered from an optimal plan by a difference-
constraints pass: tight on the plan's support, feasible everywhere,
which by complementary slackness makes them dual optimal.  They are then
tightened to exact c-concavity on the support and shifted so the first
source potential vanishes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from . import accel
from .paths import GridMismatchError, trapezoid_weights

FEASIBILITY_ATOL = 1e-9
MAX_EXPONENT = 10.0
SUPPORT_MASS_CUTOFF = 1e-12


class SolverError(RuntimeError):
    """Exact solver failed to produce an optimal plan."""


class SinkhornError(RuntimeError):
    """Sinkhorn scaling missed the marginal tolerance within max_iter."""

    def __init__(self, message, marginal_violation):
        super().__init__(message)
        self.marginal_violation = marginal_violation


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Pairwise transport costs d_L2(gamma_i, sigma_j)^p."""

    entries: np.ndarray
    exponent: float

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise ValueError("cost entries must form a matrix")
        if not np.all(np.isfinite(entries)) or np.any(entries < 0.0):
            raise ValueError("cost entries must be finite and nonnegative")
        if not 1.0 < self.exponent <= MAX_EXPONENT:
            raise ValueError(f"exponent must lie in (1, {MAX_EXPONENT}]")
        arr = entries.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class Coupling:
    """Transport plan with prescribed marginals."""

    plan: np.ndarray
    source_weights: np.ndarray
    target_weights: np.ndarray
    marginal_atol: float = FEASIBILITY_ATOL

    def __post_init__(self):
        plan = np.asarray(self.plan, dtype=np.float64)
        a = np.asarray(self.source_weights, dtype=np.float64)
        b = np.asarray(self.target_weights, dtype=np.float64)
        if plan.shape != (a.size, b.size):
            raise ValueError("plan shape must match the marginals")
        if np.any(plan < -self.marginal_atol):
            raise ValueError("plan has negative mass")
        row_gap = np.max(np.abs(plan.sum(axis=1) - a))
        col_gap = np.max(np.abs(plan.sum(axis=0) - b))
        if max(row_gap, col_gap) > self.marginal_atol:
            raise ValueError(
                f"marginal violation {max(row_gap, col_gap):.3e} exceeds "
                f"{self.marginal_atol:.1e}"
            )
        if abs(plan.sum() - 1.0) > self.marginal_atol:
            raise ValueError("total mass must be 1")
        for arr_name, arr in (("plan", plan), ("source_weights", a), ("target_weights", b)):
            frozen = arr.copy()
            frozen.flags.writeable = False
            object.__setattr__(self, arr_name, frozen)

    def support(self, cutoff=SUPPORT_MASS_CUTOFF):
        return np.argwhere(self.plan > cutoff)

    def is_permutation(self, cutoff=SUPPORT_MASS_CUTOFF):
        supp = self.plan > cutoff
        return (
            self.plan.shape[0] == self.plan.shape[1]
            and np.all(supp.sum(axis=0) == 1)
            and np.all(supp.sum(axis=1) == 1)
        )

    def permutation(self, cutoff=SUPPORT_MASS_CUTOFF):
        if not self.is_permutation(cutoff):
            raise ValueError("coupling is not a permutation plan")
        return np.argmax(self.plan, axis=1)


@dataclass(frozen=True, eq=False)
class DualPotentials:
    """Feasible Kantorovich potentials with phi c-concave on the support."""

    phi: np.ndarray
    psi: np.ndarray
    exponent: float

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64).copy()
        psi = np.asarray(self.psi, dtype=np.float64).copy()
        phi.flags.writeable = False
        psi.flags.writeable = False
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)

    def feasibility_gap(self, cost):
        """Max of phi_i + psi_j - c_ij; feasible when <= FEASIBILITY_ATOL."""
        return float(np.max(self.phi[:, None] + self.psi[None, :] - cost.entries))

    def value(self, source_weights, target_weights):
        return float(self.phi @ source_weights + self.psi @ target_weights)


# ---------------------------------------------------------------------------
# cost assembly


def cost_matrix(src, tgt, p):
    """Pairwise L2-path costs to the power p between two measures."""
    if src.group != tgt.group:
        raise GridMismatchError("measures live on different groups")
    if src.grid_size != tgt.grid_size:
        raise GridMismatchError("measures live on different grids")
    if not 1.0 < p <= MAX_EXPONENT:
        raise ValueError(f"exponent must lie in (1, {MAX_EXPONENT}]")
    w = trapezoid_weights(src.grid_size)
    a = src.stacked_points()
    b = tgt.stacked_points()
    tag = src.group.tag
    if tag == "torus":
        entries = accel.torus_cost_matrix(a, b, w, float(p))
    elif tag == "so3":
        entries = accel.so3_cost_matrix(a, b, w, float(p))
    else:
        raise NotImplementedError(
            f"no path distance (hence no transport cost) on group {tag!r}"
        )
    return CostMatrix(entries, float(p))


# ---------------------------------------------------------------------------
# exact solver


def _check_weights(w, n, name):
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError(f"{name} must have length {n}")
    if np.any(w < 0.0):
        raise ValueError(f"{name} must be nonnegative")
    if abs(float(w.sum()) - 1.0) > FEASIBILITY_ATOL:
        raise ValueError(f"{name} must sum to 1 within {FEASIBILITY_ATOL:.1e}")
    return w


def _is_uniform(w):
    return np.max(np.abs(w - 1.0 / w.size)) <= 1e-12


def solve_exact(cost, source_weights, target_weights):
    """Exact optimum of the transportation linear program.

    Uniform equal-size marginals are solved as an assignment problem and
    the plan is a permutation matrix scaled by 1/n; general marginals go
    through the HiGHS simplex.  Returns (coupling, optimal value)."""
    c = cost.entries
    n, m = c.shape
    a = _check_weights(source_weights, n, "source weights")
    b = _check_weights(target_weights, m, "target weights")
    if n == m and _is_uniform(a) and _is_uniform(b):
        rows, cols = linear_sum_assignment(c)
        plan = np.zeros((n, m))
        plan[rows, cols] = 1.0 / n
        value = float(np.sum(c[rows, cols] * a[rows]))
        return Coupling(plan, a, b), value
    res = linprog(
        c.ravel(),
        A_eq=_transport_constraints(n, m),
        b_eq=np.concatenate([a, b[:-1]]),
        bounds=(0.0, None),
        method="highs",
    )
    if not res.success:
        raise SolverError(f"transportation LP failed: {res.message}")
    plan = np.clip(res.x.reshape(n, m), 0.0, None)
    value = float(np.sum(plan * c))
    return Coupling(plan, a, b), value


def _transport_constraints(n, m):
    # row sums then the first m-1 column sums (last one is redundant)
    rows = np.zeros((n, n * m))
    for i in range(n):
        rows[i, i * m : (i + 1) * m] = 1.0
    cols = np.zeros((m - 1, n * m))
    for j in range(m - 1):
        cols[j, j::m] = 1.0
    return np.vstack([rows, cols])


def assignment_margin(cost_entries):
    """Strictness margin of the optimal assignment, per unit mass.

    Difference between the best and second-best permutation objective,
    divided by n.  Computed by forcing each off-optimal edge in turn and
    re-solving the reduced assignment.  Returns inf for 1x1 problems."""
    c = np.asarray(cost_entries, dtype=np.float64)
    n = c.shape[0]
    if c.shape != (n, n):
        raise ValueError("assignment margin needs a square cost matrix")
    rows, cols = linear_sum_assignment(c)
    best = float(c[rows, cols].sum())
    if n == 1:
        return np.inf
    opt = np.full(n, -1, dtype=int)
    opt[rows] = cols
    second = np.inf
    for i in range(n):
        for j in range(n):
            if j == opt[i]:
                continue
            sub = np.delete(np.delete(c, i, axis=0), j, axis=1)
            r2, c2 = linear_sum_assignment(sub)
            second = min(second, float(sub[r2, c2].sum()) + float(c[i, j]))
    return (second - best) / n


# ---------------------------------------------------------------------------
# entropic solver


def solve_sinkhorn(cost, source_weights, target_weights, epsilon,
                   max_iter=50_000, tol=1e-6, scaling=0.5, stage_iter=200):
    """Entropic-regularized transport via log-domain marginal scaling.

    The regularization is annealed: scaling stages walk epsilon down from
    max(target, cost scale / 2) by the given factor, warm-starting the
    potentials, before the final stage runs at the target epsilon until
    the marginal tolerance is met (max_iter caps the total iteration
    budget).  Returns (coupling, plan cost, dual potentials).  The
    potentials are hard-tightened (phi = c-transform of psi) so they are
    feasible for the unregularized dual, then shifted so phi[0] = 0.
    Raises SinkhornError carrying the last marginal violation when the
    tolerance is not met within the budget."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if not 0.0 < scaling < 1.0:
        raise ValueError("scaling factor must lie in (0, 1)")
    c = np.ascontiguousarray(cost.entries)
    a = _check_weights(source_weights, c.shape[0], "source weights")
    b = _check_weights(target_weights, c.shape[1], "target weights")
    ladder = []
    eps = max(float(epsilon), float(np.max(c)) / 2.0 if np.max(c) > 0 else epsilon)
    while eps > epsilon * (1.0 + 1e-12):
        ladder.append(eps)
        eps = max(eps * scaling, float(epsilon))
    f = np.zeros(c.shape[0])
    g = np.zeros(c.shape[1])
    used = 0
    for eps in ladder:
        f, g, it, _ = accel.sinkhorn_log(
            c, a, b, float(eps), int(stage_iter), float(tol), f, g
        )
        used += it
    f, g, iterations, violation = accel.sinkhorn_log(
        c, a, b, float(epsilon), max(int(max_iter) - used, 1), float(tol), f, g
    )
    iterations += used
    if violation > tol:
        raise SinkhornError(
            f"sinkhorn missed tol={tol:.1e} after {iterations} iterations "
            f"(marginal violation {violation:.3e})",
            marginal_violation=float(violation),
        )
    plan = np.exp((f[:, None] + g[None, :] - c) / epsilon) * a[:, None] * b[None, :]
    value = float(np.sum(plan * c))
    coupling = Coupling(plan, a, b, marginal_atol=max(tol, FEASIBILITY_ATOL))
    phi = c_transform(g, cost, direction="to-source")
    shift = phi[0]
    duals = DualPotentials(phi - shift, g + shift, cost.exponent)
    return coupling, value, duals


# ---------------------------------------------------------------------------
# duality


def c_transform(values, cost, direction="to-source"):
    """Componentwise infimum transform of a potential vector.

    'to-source' maps target potentials psi to min_j (c_ij - psi_j) on the
    sources; 'to-target' maps source potentials phi to min_i over rows."""
    c = cost.entries
    values = np.asarray(values, dtype=np.float64)
    if direction == "to-source":
        if values.shape != (c.shape[1],):
            raise ValueError("potential length must match the target support")
        return np.min(c - values[None, :], axis=1)
    if direction == "to-target":
        if values.shape != (c.shape[0],):
            raise ValueError("potential length must match the source support")
        return np.min(c - values[:, None], axis=0)
    raise ValueError(f"unknown c-transform direction {direction!r}")


def _feasible_tight_potentials(c, support_mask):
    """Solve phi_i + psi_j <= c_ij with equality on the support.

    Difference-constraints formulation on (phi, -psi) relaxed to a fixed
    point by Bellman-Ford sweeps; feasible iff the support is that of an
    optimal plan.  Raises SolverError when the sweeps fail to settle."""
    n, m = c.shape
    phi = np.zeros(n)
    chi = np.zeros(m)  # chi_j = -psi_j
    supp = [np.nonzero(support_mask[i])[0] for i in range(n)]
    for _ in range(n + m + 1):
        changed = False
        # phi_i <= chi_j + c_ij for all j
        new_phi = np.min(chi[None, :] + c, axis=1)
        if np.any(new_phi < phi - 1e-15):
            phi = np.minimum(phi, new_phi)
            changed = True
        # chi_j <= phi_i - c_ij on the support
        for i in range(n):
            for j in supp[i]:
                bound = phi[i] - c[i, j]
                if bound < chi[j] - 1e-15:
                    chi[j] = bound
                    changed = True
        if not changed:
            return phi, -chi
    raise SolverError(
        "dual recovery did not stabilize; the coupling is not optimal"
    )


def dual_from_primal(cost, coupling):
    """Optimal dual potentials recovered from an optimal coupling.

    Complementary slackness fixes phi_i + psi_j = c_ij on the plan's
    support; the remaining freedom is resolved to a globally feasible
    pair, tightened by one c-transform pass (phi = psi^c exactly) and
    normalized so phi[0] = 0.  The duality gap against the plan's cost is
    checked to within 1e-8 * (1 + value)."""
    c = cost.entries
    if coupling.plan.shape != c.shape:
        raise ValueError("coupling and cost have different shapes")
    mask = coupling.plan > SUPPORT_MASS_CUTOFF
    phi, psi = _feasible_tight_potentials(c, mask)
    phi = c_transform(psi, cost, direction="to-source")
    shift = phi[0]
    duals = DualPotentials(phi - shift, psi + shift, cost.exponent)
    primal = float(np.sum(coupling.plan * c))
    gap = abs(duals.value(coupling.source_weights, coupling.target_weights) - primal)
    if gap > 1e-8 * (1.0 + abs(primal)):
        raise SolverError(
            f"duality gap {gap:.3e} too large; the coupling is not optimal"
        )
    if duals.feasibility_gap(cost) > FEASIBILITY_ATOL:
        raise SolverError("recovered potentials are infeasible")
    return duals


# ---------------------------------------------------------------------------
# Lipschitz diagnostics


@dataclass(frozen=True, eq=False)
class LipschitzReport:
    max_ratio: float
    bound: float
    satisfied: bool
    worst_pair: tuple


def lipschitz_check(phi, src, p, diameter=None):
    """Check |phi_i - phi_k| <= p D^{p-1} d_L2(gamma_i, gamma_k) pairwise.

    D defaults to the group diameter.  Returns the largest observed
    difference ratio and whether the bound holds with 1e-9 slack."""
    from .paths import l2_distance

    phi = np.asarray(phi, dtype=np.float64)
    d = src.group.diameter if diameter is None else float(diameter)
    bound = p * d ** (p - 1.0)
    max_ratio = 0.0
    worst = (0, 0)
    ok = True
    atoms = src.support
    for i in range(len(atoms)):
        for k in range(i + 1, len(atoms)):
            dist = l2_distance(atoms[i], atoms[k])
            gap = abs(phi[i] - phi[k])
            if gap > bound * dist + FEASIBILITY_ATOL:
                ok = False
            if dist > 0.0 and gap / dist > max_ratio:
                max_ratio = gap / dist
                worst = (i, k)
    return LipschitzReport(max_ratio, bound, ok, worst)
