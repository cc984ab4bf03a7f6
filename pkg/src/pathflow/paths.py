"""Discretized paths and loops, path distances, and measure sampling.

A path is sampled on the uniform grid t_k = k/N and starts at the
identity; a loop also ends there.  Three distances are provided:

    uniform_distance   max over grid nodes of the group distance
    l2_distance        trapezoid-weighted L2 average of node distances
    cameron_martin_distance
                       discrete body-velocity energy of gamma1^{-1} gamma2

The Cameron-Martin value is always finite on a finite grid even though
the continuum quantity is almost surely infinite between rough paths;
it is only meaningful (grid-stable) on piecewise-geodesic inputs.

Samplers: group Brownian paths (left-increment random walk), an exact
per-coordinate Gaussian bridge on tori, and a geodesic endpoint
correction that pins any group's Brownian path into a loop.  Both loop
samplers are documented approximations of the corresponding continuum
measures; neither claims exact law equality beyond the abelian bridge.
"""

from dataclasses import dataclass, field

import numpy as np

from .groups import Group, GroupMismatchError, Torus

LOOP_ENDPOINT_ATOL = 1e-12


class GridMismatchError(ValueError):
    """Paths or measures live on different grids."""


def _freeze(arr):
    arr = np.array(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """A path on the grid t_k = k/N, starting at the identity exactly."""

    group: Group
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        shape = self.group.element_shape
        if pts.ndim != 1 + len(shape) or pts.shape[1:] != shape:
            raise ValueError(f"points must have shape (N+1,)+{shape}")
        if pts.shape[0] < 2:
            raise ValueError("a path needs at least two grid nodes")
        self.group.check_element(pts)
        if not np.array_equal(pts[0], self.group.identity()):
            raise ValueError("path must start at the identity exactly")
        object.__setattr__(self, "points", _freeze(pts))

    @property
    def grid_size(self):
        return self.points.shape[0] - 1

    @property
    def times(self):
        return np.linspace(0.0, 1.0, self.points.shape[0])


@dataclass(frozen=True, eq=False)
class DiscreteLoop(DiscretePath):
    """A path that also returns to the identity at t = 1.

    Constructed loops hit the endpoint exactly; sampled loops are pinned
    within LOOP_ENDPOINT_ATOL in element coordinates.
    """

    endpoint_atol: float = field(default=LOOP_ENDPOINT_ATOL, repr=False)

    def __post_init__(self):
        super().__post_init__()
        gap = np.max(np.abs(self.points[-1] - self.group.identity()))
        if gap > self.endpoint_atol:
            raise ValueError(
                f"loop endpoint misses the identity by {gap:.3e} "
                f"(allowed {self.endpoint_atol:.1e})"
            )


@dataclass(frozen=True, eq=False)
class CameronMartinVector:
    """Algebra-valued perturbation direction h with h(0) = 0.

    values[k] are the coordinates of h(t_k); loops additionally require
    h(1) = 0.  The H-norm is the summed squared increment energy."""

    values: np.ndarray
    loop: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] < 2:
            raise ValueError("values must have shape (N+1, d) with N >= 1")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if np.any(vals[0] != 0.0):
            raise ValueError("h(0) must vanish exactly")
        if self.loop and np.any(vals[-1] != 0.0):
            raise ValueError("loop-mode h(1) must vanish exactly")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def grid_size(self):
        return self.values.shape[0] - 1

    def h_norm(self):
        return np.sqrt(h_inner(self, self))


def h_inner(h1, h2):
    """Cameron-Martin inner product sum_k <dh1_k, dh2_k> * N."""
    if h1.grid_size != h2.grid_size:
        raise GridMismatchError("H-space vectors live on different grids")
    d1 = np.diff(h1.values, axis=0)
    d2 = np.diff(h2.values, axis=0)
    return float(np.sum(d1 * d2) * h1.grid_size)


def hat_basis(grid_size, dim, loop=False):
    """Interior-node hat functions tensored with the algebra basis.

    Returns the (N-1)*d perturbation directions h with h(t_k) = e_a at
    one interior node and zero elsewhere; they span the discrete H-space
    vanishing at both endpoints and are valid in path and loop mode."""
    basis = []
    for k in range(1, grid_size):
        for a in range(dim):
            vals = np.zeros((grid_size + 1, dim))
            vals[k, a] = 1.0
            basis.append(CameronMartinVector(vals, loop=loop))
    return basis


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Weighted finite collection of paths on one common grid."""

    support: tuple
    weights: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        if not support:
            raise ValueError("empirical measure needs at least one atom")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(support),):
            raise ValueError("weights must match the number of atoms")
        if np.any(w <= 0.0):
            raise ValueError("weights must be positive")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        g = support[0].group
        n = support[0].grid_size
        for p in support[1:]:
            if p.group != g:
                raise GroupMismatchError("support paths live on different groups")
            if p.grid_size != n:
                raise GridMismatchError("support paths live on different grids")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", _freeze(w))

    @classmethod
    def uniform(cls, paths):
        paths = tuple(paths)
        return cls(paths, np.full(len(paths), 1.0 / len(paths)))

    @property
    def group(self):
        return self.support[0].group

    @property
    def grid_size(self):
        return self.support[0].grid_size

    def __len__(self):
        return len(self.support)

    def stacked_points(self):
        return np.ascontiguousarray(np.stack([p.points for p in self.support]))


# ---------------------------------------------------------------------------
# distances


def check_compatible(p1, p2):
    if p1.group != p2.group:
        raise GroupMismatchError("paths live on different groups")
    if p1.grid_size != p2.grid_size:
        raise GridMismatchError("paths live on different grids")


def trapezoid_weights(grid_size):
    w = np.full(grid_size + 1, 1.0 / grid_size)
    w[0] = w[-1] = 0.5 / grid_size
    return w


def uniform_distance(p1, p2):
    check_compatible(p1, p2)
    return float(np.max(p1.group.distance(p1.points, p2.points)))


def l2_distance(p1, p2):
    check_compatible(p1, p2)
    rho = p1.group.distance(p1.points, p2.points)
    w = trapezoid_weights(p1.grid_size)
    return float(np.sqrt(np.sum(w * rho * rho)))


def cameron_martin_distance(p1, p2):
    check_compatible(p1, p2)
    g = p1.group
    rel = g.mul(g.inv(p1.points), p2.points)
    inc = g.distance(rel[:-1], rel[1:])
    return float(np.sqrt(np.sum(inc * inc) * p1.grid_size))


def pointwise_product(left, path):
    """Left translation of a path by another path, node by node."""
    check_compatible(left, path)
    pts = left.group.mul(left.points, path.points)
    if isinstance(left, DiscreteLoop) and isinstance(path, DiscreteLoop):
        return DiscreteLoop(left.group, pts)
    return DiscretePath(left.group, pts)


# ---------------------------------------------------------------------------
# samplers


def _as_rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_brownian_path(group, grid_size, seed):
    """Left-increment random walk gamma_{k+1} = gamma_k exp(xi_k / sqrt(N)).

    Deterministic given (group, grid_size, seed); the increments are iid
    standard Gaussian vectors in the algebra basis."""
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    rng = _as_rng(seed)
    xi = rng.standard_normal((grid_size, group.dim)) / np.sqrt(grid_size)
    steps = group.exp(xi)
    pts = np.empty((grid_size + 1,) + group.element_shape)
    pts[0] = group.identity()
    for k in range(grid_size):
        pts[k + 1] = group.mul(pts[k], steps[k])
    return DiscretePath(group, pts)


def sample_loop(group, grid_size, seed, method="geodesic-correction"):
    """Sample a loop pinned at the identity.

    'torus-bridge' draws an exact Gaussian bridge per angle coordinate
    (tori only, endpoint exactly the identity).  'geodesic-correction'
    slides any group's Brownian path back along the one-parameter
    subgroup of its endpoint: gamma_k exp(-t_k log gamma_N), landing on
    the identity within LOOP_ENDPOINT_ATOL."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2 for loops")
    if method == "torus-bridge":
        if not isinstance(group, Torus):
            raise ValueError("torus-bridge sampling requires a torus group")
        rng = _as_rng(seed)
        xi = rng.standard_normal((grid_size, group.dim)) / np.sqrt(grid_size)
        walk = np.concatenate([np.zeros((1, group.dim)), np.cumsum(xi, axis=0)])
        times = np.linspace(0.0, 1.0, grid_size + 1)
        bridge = walk - times[:, None] * walk[-1]
        return DiscreteLoop(group, group.exp(bridge))
    if method == "geodesic-correction":
        base = sample_brownian_path(group, grid_size, seed)
        drift = group.log(base.points[-1])
        times = np.linspace(0.0, 1.0, grid_size + 1)
        correction = group.exp(-times[:, None] * drift)
        return DiscreteLoop(group, group.mul(base.points, correction))
    raise ValueError(f"unknown loop sampling method {method!r}")


# ---------------------------------------------------------------------------
# cylindrical functions and their loop-space gradient


def green_kernel(theta, t):
    """Bridge covariance profile min(theta, t) - theta * t."""
    return np.minimum(theta, t) - theta * t


@dataclass(frozen=True, eq=False)
class CylindricalFunction:
    """A function of finitely many loop evaluations F(l) = f(l(theta_1),
    ..., l(theta_m)).

    ``fn`` maps the tuple of evaluation points to a float.  ``grad``, if
    given, returns the (m, d) array of left-translated slot gradients at
    those points; otherwise central differences with ``fd_step`` are used.
    """

    times: tuple
    fn: object
    grad: object = None
    fd_step: float = 1e-5

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times or any(
            t2 <= t1 for t1, t2 in zip(times, times[1:])
        ):
            raise ValueError("evaluation times must be strictly increasing")
        if times[0] <= 0.0 or times[-1] > 1.0:
            raise ValueError("evaluation times must lie in (0, 1]")
        object.__setattr__(self, "times", times)

    def slot_gradients(self, group, pts):
        if self.grad is not None:
            out = np.asarray(self.grad(pts), dtype=np.float64)
            if out.shape != (len(pts), group.dim):
                raise ValueError("grad must return an (m, d) array")
            return out
        out = np.empty((len(pts), group.dim))
        eps = self.fd_step
        for i in range(len(pts)):
            for a in range(group.dim):
                direction = np.zeros(group.dim)
                direction[a] = eps
                plus = list(pts)
                plus[i] = group.mul(pts[i], group.exp(direction))
                minus = list(pts)
                minus[i] = group.mul(pts[i], group.exp(-direction))
                out[i, a] = (self.fn(plus) - self.fn(minus)) / (2.0 * eps)
        return out


def cylindrical_gradient(func, loop):
    """Gradient of a cylindrical function as a Cameron-Martin vector.

    The slot gradients, left-translated to the algebra, are spread over
    the grid by the bridge kernel profile; the result vanishes exactly at
    both endpoints."""
    n = loop.grid_size
    idx = []
    for theta in func.times:
        k = theta * n
        if abs(k - round(k)) > 1e-9:
            raise ValueError(f"evaluation time {theta} is not a grid node")
        idx.append(int(round(k)))
    pts = [loop.points[k] for k in idx]
    slot = func.slot_gradients(loop.group, pts)
    times = np.linspace(0.0, 1.0, n + 1)
    vals = np.zeros((n + 1, loop.group.dim))
    for i, theta in enumerate(func.times):
        vals += green_kernel(theta, times)[:, None] * slot[i]
    return CameronMartinVector(vals, loop=True)
