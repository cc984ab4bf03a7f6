"""Displacement geometry of matched paths and measures.

For a matched pair of paths the displacement field collects the
minimizing logarithms V_k = log(gamma1(t_k)^{-1} gamma2(t_k)), the
constant body velocity of the node-wise connecting geodesics (sign
convention: gamma2(t_k) = gamma1(t_k) exp(V_k)).  Everything else here
is built from it:

  * geodesic interpolation of paths and of whole measures (displacement
    interpolation, the Wasserstein geodesic between empirical measures);
  * the finite-difference link between dual potentials and displacement
    fields: the directional derivative of the c-transform potential along
    an admissible perturbation h equals
        -p d^{p-2} sum_k w_k <V_k, h(t_k)>;
  * the explicit transport-map reconstruction: half the second time
    difference of the potential gradient recovers V, and exp of it maps
    the source path onto its target;
  * the backward constant-velocity ODE that turns V back into the
    connecting geodesic, and mollified window averages that read V off a
    field at a continuity point.
"""

from dataclasses import dataclass

import numpy as np

from .ot import cost_matrix
from .paths import (
    CameronMartinVector,
    DiscretePath,
    EmpiricalMeasure,
    check_compatible,
    h_inner,
    hat_basis,
    l2_distance,
)

CUT_FLAG_MARGIN = 1e-6
MIN_FD_STEP = 1e-12


@dataclass(frozen=True, eq=False)
class DisplacementField:
    """Node-wise minimizing logarithms joining two paths."""

    group: object
    vectors: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=np.float64)
        if vec.ndim != 2 or vec.shape[1] != self.group.dim or vec.shape[0] < 2:
            raise ValueError("vectors must have shape (N+1, d)")
        if not np.all(np.isfinite(vec)):
            raise ValueError("vectors must be finite")
        arr = vec.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "vectors", arr)

    @property
    def grid_size(self):
        return self.vectors.shape[0] - 1

    def norms(self):
        return np.sqrt(np.sum(self.vectors * self.vectors, axis=1))


def displacement_field(path1, path2):
    """Displacement field with gamma2(t_k) = gamma1(t_k) exp(V_k).

    Validated on construction: exp(V_k) reproduces the relative element
    within 1e-9 at every node and |V_k| never exceeds the diameter."""
    check_compatible(path1, path2)
    g = path1.group
    rel = g.mul(g.inv(path1.points), path2.points)
    vec = g.log(rel)
    roundtrip = g.exp(vec)
    if np.max(np.abs(roundtrip - rel)) > 1e-9:
        raise ValueError("logarithm roundtrip failed at a grid node")
    norms = np.sqrt(np.sum(vec * vec, axis=-1))
    if np.any(norms > g.diameter + 1e-9):
        raise ValueError("displacement norm exceeds the group diameter")
    return DisplacementField(g, vec)


def has_cut_pair(path1, path2, margin=CUT_FLAG_MARGIN):
    """True if any node pair sits within ``margin`` of the cut locus."""
    check_compatible(path1, path2)
    return bool(
        np.min(path1.group.cut_margin(path1.points, path2.points)) <= margin
    )


def interpolate_path(path1, path2, lam):
    """Node-wise geodesic interpolant u(t_k) = gamma1(t_k) exp(lam V_k).

    Away from cut pairs, d_L2(gamma1, u) = lam * d_L2(gamma1, gamma2) and
    d_L2(u, gamma2) = (1 - lam) * d_L2(gamma1, gamma2) hold to roundoff."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("interpolation parameter must lie in [0, 1]")
    field = displacement_field(path1, path2)
    g = path1.group
    pts = g.mul(path1.points, g.exp(lam * field.vectors))
    return DiscretePath(g, pts)


def interpolate_measure(src, tgt, coupling, lam, mass_cutoff=1e-12):
    """Displacement interpolation of measures under a transport plan.

    Atom (i, j) of the plan contributes the path interpolant with weight
    plan_ij; for permutation plans this is a pushforward by a map.  At
    the endpoints the support reproduces the source (resp. target) atoms;
    coinciding interpolants are kept as separate atoms, not merged."""
    _check_plan_marginals(src, tgt, coupling)
    support = coupling.support(mass_cutoff)
    paths = []
    weights = []
    for i, j in support:
        paths.append(interpolate_path(src.support[i], tgt.support[j], lam))
        weights.append(coupling.plan[i, j])
    weights = np.asarray(weights)
    return EmpiricalMeasure(tuple(paths), weights / weights.sum())


def _check_plan_marginals(src, tgt, coupling):
    if coupling.plan.shape != (len(src), len(tgt)):
        raise ValueError("plan shape does not match the measures")
    row_gap = np.max(np.abs(coupling.plan.sum(axis=1) - src.weights))
    col_gap = np.max(np.abs(coupling.plan.sum(axis=0) - tgt.weights))
    if max(row_gap, col_gap) > 1e-9:
        raise ValueError("plan marginals do not match the measures")


@dataclass(frozen=True, eq=False)
class InterpolationResult:
    """Wasserstein geodesic schedule: nu_lam with W2(nu_0, nu_lam)."""

    lambdas: tuple
    measures: tuple
    distances: tuple


def displacement_interpolation(src, tgt, coupling, lambdas):
    """Interpolated measures for each lambda plus solved W2(nu_0, nu_lam).

    Lambdas are sorted into increasing order.  The distances come from a
    fresh exact transport solve at exponent 2 for every interpolant."""
    from .ot import solve_exact

    lams = sorted(float(l) for l in lambdas)
    if lams and (lams[0] < 0.0 or lams[-1] > 1.0):
        raise ValueError("interpolation parameters must lie in [0, 1]")
    measures = []
    distances = []
    for lam in lams:
        nu = interpolate_measure(src, tgt, coupling, lam)
        if lam == 0.0:
            distances.append(0.0)
        else:
            cost = cost_matrix(src, nu, 2.0)
            _, value = solve_exact(cost, src.weights, nu.weights)
            distances.append(float(np.sqrt(value)))
        measures.append(nu)
    return InterpolationResult(tuple(lams), tuple(measures), tuple(distances))


# ---------------------------------------------------------------------------
# c-transform potentials as functions of a path, and their derivatives


def ctransform_value(tgt, psi, p, path):
    """phi(path) = min_j d_L2(path, sigma_j)^p - psi_j over the support."""
    psi = np.asarray(psi, dtype=np.float64)
    vals = [
        l2_distance(path, sigma) ** p - psi[j]
        for j, sigma in enumerate(tgt.support)
    ]
    return float(np.min(vals))


def ctransform_argmin_gap(tgt, psi, p, path):
    """Gap between the two smallest branch values of the c-transform min;
    the potential is differentiable at the path only when this is positive."""
    psi = np.asarray(psi, dtype=np.float64)
    vals = np.sort(
        [l2_distance(path, sigma) ** p - psi[j] for j, sigma in enumerate(tgt.support)]
    )
    return float(vals[1] - vals[0]) if vals.size > 1 else np.inf


def perturb_path(path, h, eps):
    """Right-translate each node by exp(eps * h(t_k))."""
    if h.grid_size != path.grid_size:
        raise ValueError("perturbation and path live on different grids")
    g = path.group
    pts = g.mul(path.points, g.exp(eps * h.values))
    return DiscretePath(g, pts)


def directional_derivative(tgt, psi, p, path, h, step=1e-4):
    """Forward finite difference of the c-transform potential along h.

    First order in ``step`` by construction, so halving the step halves
    the error of every identity built on top of it; a Richardson probe
    at 2*step estimates that error when needed."""
    if step < MIN_FD_STEP:
        raise ValueError(f"finite-difference step below {MIN_FD_STEP:.0e}")
    up = ctransform_value(tgt, psi, p, perturb_path(path, h, step))
    base = ctransform_value(tgt, psi, p, path)
    return (up - base) / step


def potential_gradient(tgt, psi, p, path, basis=None, step=1e-4, loop=False,
                       richardson_tol=None):
    """H-space representation of the potential gradient at a path.

    Finite-difference directional derivatives along the basis (interior
    hat functions tensor the algebra basis by default) are assembled into
    a Cameron-Martin vector through the basis Gram matrix, so that
    <gradient, h>_H reproduces each measured derivative.

    When ``richardson_tol`` is set, every derivative is re-measured at
    2*step; the difference estimates the first-order truncation error,
    and a gap above the tolerance (kink noise from a c-transform tie, or
    a step too large for the local curvature) raises ValueError."""
    n = path.grid_size
    d = path.group.dim
    if basis is None:
        basis = hat_basis(n, d, loop=loop)
    rhs = np.array(
        [directional_derivative(tgt, psi, p, path, h, step) for h in basis]
    )
    if richardson_tol is not None:
        coarse = np.array(
            [directional_derivative(tgt, psi, p, path, h, 2.0 * step) for h in basis]
        )
        gap = float(np.max(np.abs(rhs - coarse)))
        if gap > richardson_tol:
            raise ValueError(
                f"finite-difference probe at 2*step disagrees by {gap:.3e} "
                f"(tol {richardson_tol:.1e}); the potential may be kinked here"
            )
    gram = np.array([[h_inner(h1, h2) for h2 in basis] for h1 in basis])
    coeff = np.linalg.solve(gram, rhs)
    vals = np.zeros((n + 1, d))
    for c, h in zip(coeff, basis):
        vals += c * h.values
    vals[0] = 0.0
    if loop:
        vals[-1] = 0.0
    return CameronMartinVector(vals, loop=loop)


def reconstruct_map(gradient, path):
    """Transport-map reconstruction from a potential gradient field.

    Half the discrete second time derivative of the gradient recovers the
    displacement vectors at interior nodes (the endpoint values of the
    hat representation vanish, so the centered stencil is valid at every
    interior node); exp of them pushes the path onto its target.  The
    endpoints carry zero displacement and are excluded from comparisons."""
    n = path.grid_size
    if n < 4:
        raise ValueError("second differences need a grid of size >= 4")
    if gradient.grid_size != n:
        raise ValueError("gradient field and path live on different grids")
    g = gradient.values
    vec = np.zeros_like(g)
    vec[1:-1] = 0.5 * n * n * (g[2:] - 2.0 * g[1:-1] + g[:-2])
    grp = path.group
    pts = grp.mul(path.points, grp.exp(vec))
    return DiscretePath(grp, pts)


def reconstruct_geodesic_from_velocity(group, velocity, steps=1000):
    """Integrate v' = v * k backward from v(1) = e with constant k.

    Classical RK4 on the ambient coordinates; returns the steps+1 curve
    points indexed by increasing s, so [0] is v(0) = exp(-k) and [-1] is
    the identity.  Composed with a displacement field this recovers
    gamma2(t)^{-1} gamma1(t)."""
    velocity = group.check_algebra(velocity)
    tag = group.tag
    if tag == "torus":
        def rhs(v):
            return velocity
    elif tag == "so3":
        k = np.zeros((3, 3))
        k[0, 1], k[0, 2], k[1, 2] = -velocity[2], velocity[1], -velocity[0]
        k[1, 0], k[2, 0], k[2, 1] = velocity[2], -velocity[1], velocity[0]

        def rhs(v):
            return v @ k
    elif tag == "heisenberg":
        nn = (group.dim - 1) // 2
        k_xi, k_eta, k_t = velocity[:nn], velocity[nn : 2 * nn], velocity[-1]

        def rhs(v):
            out = np.empty_like(v)
            out[:nn] = k_xi
            out[nn : 2 * nn] = k_eta
            out[-1] = k_t + 2.0 * np.sum(
                v[nn : 2 * nn] * k_xi - v[:nn] * k_eta
            )
            return out
    else:
        raise NotImplementedError(f"no body-velocity ODE for group {tag!r}")

    h = 1.0 / steps
    shape = group.element_shape
    curve = np.empty((steps + 1,) + shape)
    v = np.asarray(group.identity(), dtype=np.float64)
    curve[steps] = v
    for idx in range(steps, 0, -1):
        k1 = rhs(v)
        k2 = rhs(v - 0.5 * h * k1)
        k3 = rhs(v - 0.5 * h * k2)
        k4 = rhs(v - h * k3)
        v = v - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        curve[idx - 1] = v
    if tag == "torus":
        from .accel import wrap_angles

        curve = wrap_angles(curve)
    return curve


def window_average(field, t0, eps):
    """Mean of a displacement field over the grid nodes in
    [t0 - eps, t0 + eps] intersected with [0, 1] (trapezoid end weights)."""
    if not 0.0 <= t0 <= 1.0:
        raise ValueError("window center must lie in [0, 1]")
    n = field.grid_size
    times = np.linspace(0.0, 1.0, n + 1)
    lo = max(0.0, t0 - eps)
    hi = min(1.0, t0 + eps)
    inside = np.nonzero((times >= lo - 1e-15) & (times <= hi + 1e-15))[0]
    if inside.size == 0:
        inside = np.array([int(round(t0 * n))])
    w = np.ones(inside.size)
    if inside.size > 1:
        w[0] = w[-1] = 0.5
    w /= w.sum()
    return w @ field.vectors[inside]


def mollifier_extract(field, t0, eps_sequence):
    """Localized averages of the field shrinking onto t0.

    Evaluates the window average for each epsilon (windows clipped to
    [0, 1]) and returns the estimate at the smallest one; for fields
    continuous at t0 this converges to the node value."""
    eps_sorted = sorted(float(e) for e in eps_sequence)
    if not eps_sorted or eps_sorted[0] <= 0.0:
        raise ValueError("need a sequence of positive window widths")
    return window_average(field, t0, eps_sorted[0])
