"""Structure groups: torus, 3D rotations, and the Heisenberg group.

Group elements are plain numpy arrays tagged by the ``Group`` object that
owns the operations:

    Torus(d)       angle vectors of length d, each angle in [-pi, pi)
    SO3()          3x3 rotation matrices
    Heisenberg(n)  vectors (xi_1..xi_n, eta_1..eta_n, t) in exponential
                   coordinates

Algebra elements are coefficient vectors in a fixed orthonormal basis, so
the algebra norm is the Euclidean norm of coordinates.  All operations
broadcast over leading axes, which is how whole discretized paths are
pushed through at once.

The torus and SO3 carry their bi-invariant metrics and a full geodesic
toolkit (exponential, minimizing logarithm with a deterministic cut-locus
tie-break, distance, connection, geodesic ODE).  The Heisenberg group is
included for its closed-form sub-Riemannian geodesics only: there is no
Carnot-Caratheodory distance solver, so ``distance`` raises.
"""

from dataclasses import dataclass, field

import numpy as np

from . import accel

TWO_PI = 2.0 * np.pi


class GroupMismatchError(ValueError):
    """Operands live on different groups."""


# ---------------------------------------------------------------------------
# metric data and the left-invariant connection


@dataclass(frozen=True, eq=False)
class MetricData:
    """Structure constants and Christoffel symbols in an orthonormal basis.

    structure_constants[i, j, k] = <[e_i, e_j], e_k>; christoffel[i, j, k]
    is the connection coefficient <nabla_{e_i} e_j, e_k>.  Constant over
    the group because the frame is left invariant.
    """

    dim: int
    structure_constants: np.ndarray
    christoffel: np.ndarray
    ad_invariant: bool


def metric_from_structure(constants, ad_invariant):
    c = np.asarray(constants, dtype=np.float64)
    d = c.shape[0]
    if c.shape != (d, d, d):
        raise ValueError("structure constants must be a (d, d, d) tensor")
    if not np.array_equal(c, -c.transpose(1, 0, 2)):
        raise ValueError("structure constants must be antisymmetric in (i, j)")
    if ad_invariant and not np.array_equal(c, -c.transpose(0, 2, 1)):
        raise ValueError("ad-invariant metric needs totally antisymmetric constants")
    # Gamma[i, j, k] = (c[i,j,k] - c[i,k,j] - c[j,k,i]) / 2
    gamma = 0.5 * (c - c.transpose(0, 2, 1) - c.transpose(2, 0, 1))
    c = c.copy()
    gamma_arr = gamma.copy()
    c.flags.writeable = False
    gamma_arr.flags.writeable = False
    return MetricData(d, c, gamma_arr, ad_invariant)


def levi_civita(metric, a, b):
    """Connection value nabla_a b = (ad_a b - ad*_a b - ad*_b a) / 2."""
    c = metric.structure_constants
    ad_ab = np.einsum("i,j,ijk->k", a, b, c)
    ad_star_ab = np.einsum("i,k,ijk->j", a, b, c)
    ad_star_ba = np.einsum("i,k,ijk->j", b, a, c)
    return 0.5 * (ad_ab - ad_star_ab - ad_star_ba)


# ---------------------------------------------------------------------------
# groups


class Group:
    """Common interface; concrete groups are frozen dataclasses below."""

    tag = "abstract"

    # subclasses set: dim (algebra dimension), element_shape (tuple)

    def identity(self):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def exp(self, coords):
        """One-parameter-subgroup exponential of algebra coordinates."""
        raise NotImplementedError

    def log(self, g):
        """Minimizing logarithm with the deterministic cut-locus tie-break."""
        raise NotImplementedError

    def distance(self, a, b):
        raise NotImplementedError

    def adjoint(self, g, coords):
        """Adjoint action of the element g on algebra coordinates."""
        raise NotImplementedError

    def structure_constants(self):
        raise NotImplementedError

    def metric(self):
        return metric_from_structure(self.structure_constants(), self.ad_invariant)

    def bracket(self, x, y):
        c = self.structure_constants()
        return np.einsum("...i,...j,ijk->...k", x, y, c)

    def check_element(self, g):
        raise NotImplementedError

    def check_algebra(self, coords):
        coords = np.asarray(coords, dtype=np.float64)
        if coords.shape[-1] != self.dim:
            raise ValueError(f"algebra vector must have length {self.dim}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("algebra vector has non-finite entries")
        return coords

    def cut_margin(self, a, b):
        """Distance of the pair to the cut locus (0 means a cut pair)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Torus(Group):
    dim: int = 1
    tag: str = field(default="torus", init=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("torus dimension must be >= 1")

    @property
    def element_shape(self):
        return (self.dim,)

    @property
    def diameter(self):
        return np.pi * np.sqrt(self.dim)

    @property
    def ad_invariant(self):
        return True

    def identity(self):
        return np.zeros(self.dim)

    def mul(self, a, b):
        return accel.wrap_angles(np.asarray(a) + np.asarray(b))

    def inv(self, a):
        return accel.wrap_angles(-np.asarray(a))

    def exp(self, coords):
        return accel.wrap_angles(coords)

    def log(self, g):
        # the wrapped representative is the minimizing log except at the
        # antipode, where the positive branch +pi is selected
        g = np.asarray(g, dtype=np.float64)
        return np.where(g == -np.pi, np.pi, g)

    def distance(self, a, b):
        # fold |b - a| into [0, pi]; |b - a| = |a - b| bitwise, so the
        # distance is symmetric to the last ulp
        diff = np.mod(np.abs(np.asarray(b) - np.asarray(a)), TWO_PI)
        diff = np.minimum(diff, TWO_PI - diff)
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def adjoint(self, g, coords):
        return np.asarray(coords, dtype=np.float64)

    def structure_constants(self):
        return np.zeros((self.dim, self.dim, self.dim))

    def check_element(self, g):
        g = np.asarray(g, dtype=np.float64)
        if g.shape[-1] != self.dim:
            raise ValueError(f"torus element must have {self.dim} angles")
        if not np.all(np.isfinite(g)):
            raise ValueError("torus element has non-finite entries")
        if np.any(g < -np.pi) or np.any(g >= np.pi):
            raise ValueError("torus angles must lie in [-pi, pi)")
        return g

    def cut_margin(self, a, b):
        diff = accel.wrap_angles(np.asarray(b) - np.asarray(a))
        return np.pi - np.max(np.abs(diff), axis=-1)


@dataclass(frozen=True)
class SO3(Group):
    tag: str = field(default="so3", init=False, repr=False)
    dim = 3

    @property
    def element_shape(self):
        return (3, 3)

    @property
    def diameter(self):
        return np.pi

    @property
    def ad_invariant(self):
        return True

    def identity(self):
        return np.eye(3)

    def mul(self, a, b):
        return np.asarray(a) @ np.asarray(b)

    def inv(self, a):
        return np.swapaxes(np.asarray(a), -1, -2)

    def exp(self, coords):
        coords = np.asarray(coords, dtype=np.float64)
        flat = coords.reshape(-1, 3)
        return accel.so3_exp_batch(np.ascontiguousarray(flat)).reshape(
            coords.shape[:-1] + (3, 3)
        )

    def log(self, g):
        g = np.asarray(g, dtype=np.float64)
        flat = g.reshape(-1, 3, 3)
        return accel.so3_log_batch(np.ascontiguousarray(flat)).reshape(
            g.shape[:-2] + (3,)
        )

    def distance(self, a, b):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        lead = np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
        a = np.broadcast_to(a, lead + (3, 3)).reshape(-1, 3, 3)
        b = np.broadcast_to(b, lead + (3, 3)).reshape(-1, 3, 3)
        ang = accel.so3_angle_batch(
            np.ascontiguousarray(a), np.ascontiguousarray(b)
        )
        return ang.reshape(lead) if lead else float(ang[0])

    def adjoint(self, g, coords):
        return np.einsum("...ij,...j->...i", np.asarray(g), np.asarray(coords))

    def structure_constants(self):
        eps = np.zeros((3, 3, 3))
        eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
        eps[1, 0, 2] = eps[2, 1, 0] = eps[0, 2, 1] = -1.0
        return eps

    def check_element(self, g):
        g = np.asarray(g, dtype=np.float64)
        if g.shape[-2:] != (3, 3):
            raise ValueError("rotation element must be a 3x3 matrix")
        gram = np.swapaxes(g, -1, -2) @ g - np.eye(3)
        if np.max(np.abs(gram)) > 1e-10:
            raise ValueError("matrix is not orthogonal within 1e-10")
        if np.max(np.abs(np.linalg.det(g) - 1.0)) > 1e-10:
            raise ValueError("matrix determinant differs from 1 beyond 1e-10")
        return g

    def cut_margin(self, a, b):
        return np.pi - self.distance(a, b)


@dataclass(frozen=True)
class Heisenberg(Group):
    """Heisenberg group in exponential coordinates (xi, eta, t).

    Group law: [zeta, t][zeta', t'] = [zeta + zeta', t + t' + 2 sum_j
    Im(zeta_j conj(zeta'_j))] with zeta = xi + i eta.  Only the group
    structure and the closed-form unit-speed geodesics are provided; the
    Carnot-Caratheodory distance has no solver here, so ``distance`` and
    ``cut_margin`` raise.
    """

    n: int = 1
    tag: str = field(default="heisenberg", init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("heisenberg index must be >= 1")

    @property
    def dim(self):
        return 2 * self.n + 1

    @property
    def element_shape(self):
        return (2 * self.n + 1,)

    @property
    def diameter(self):
        raise NotImplementedError(
            "the Heisenberg group is unbounded and carries no distance solver"
        )

    def identity(self):
        return np.zeros(2 * self.n + 1)

    def _split(self, g):
        g = np.asarray(g, dtype=np.float64)
        return g[..., : self.n], g[..., self.n : 2 * self.n], g[..., -1]

    def mul(self, a, b):
        xi_a, eta_a, t_a = self._split(a)
        xi_b, eta_b, t_b = self._split(b)
        twist = 2.0 * np.sum(eta_a * xi_b - xi_a * eta_b, axis=-1)
        out = np.empty(np.broadcast_shapes(np.shape(a), np.shape(b)))
        out[..., : self.n] = xi_a + xi_b
        out[..., self.n : 2 * self.n] = eta_a + eta_b
        out[..., -1] = t_a + t_b + twist
        return out

    def inv(self, a):
        return -np.asarray(a, dtype=np.float64)

    def exp(self, coords):
        # exponential coordinates: the chart is the exponential map
        return np.array(coords, dtype=np.float64)

    def log(self, g):
        return np.array(g, dtype=np.float64)

    def distance(self, a, b):
        raise NotImplementedError(
            "no Carnot-Caratheodory distance solver for the Heisenberg group"
        )

    def adjoint(self, g, coords):
        xi_g, eta_g, _ = self._split(g)
        x_xi, x_eta, x_t = self._split(coords)
        out = np.empty(np.broadcast_shapes(np.shape(g), np.shape(coords)))
        out[..., : self.n] = x_xi
        out[..., self.n : 2 * self.n] = x_eta
        out[..., -1] = x_t + 4.0 * np.sum(eta_g * x_xi - xi_g * x_eta, axis=-1)
        return out

    def structure_constants(self):
        d = self.dim
        c = np.zeros((d, d, d))
        for i in range(self.n):
            c[i, self.n + i, d - 1] = -4.0
            c[self.n + i, i, d - 1] = 4.0
        return c

    @property
    def ad_invariant(self):
        return False

    def check_element(self, g):
        g = np.asarray(g, dtype=np.float64)
        if g.shape[-1] != self.dim:
            raise ValueError(f"heisenberg element must have length {self.dim}")
        if not np.all(np.isfinite(g)):
            raise ValueError("heisenberg element has non-finite entries")
        return g

    def cut_margin(self, a, b):
        raise NotImplementedError("no cut-locus computation for the Heisenberg group")


def group_from_tag(tag, dim):
    """Construct a group from its serialized (tag, dim) pair."""
    if tag == "torus":
        return Torus(dim)
    if tag == "so3":
        if dim not in (3, None):
            raise ValueError("so3 has fixed dimension 3")
        return SO3()
    if tag == "heisenberg":
        if dim < 3 or dim % 2 == 0:
            raise ValueError("heisenberg dimension must be odd and >= 3")
        return Heisenberg((dim - 1) // 2)
    raise ValueError(f"unknown group tag {tag!r}")


def group_dim(group):
    """Serialized dimension field for a group."""
    if isinstance(group, Torus):
        return group.dim
    if isinstance(group, SO3):
        return 3
    if isinstance(group, Heisenberg):
        return group.dim
    raise TypeError(f"unsupported group {group!r}")


# ---------------------------------------------------------------------------
# geodesics


def geodesic_point(group, g, h, lam):
    """Point at parameter lam on the minimizing geodesic from g to h."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("geodesic parameter must lie in [0, 1]")
    rel = group.log(group.mul(group.inv(g), h))
    return group.mul(g, group.exp(lam * rel))


def integrate_geodesic(group, start, velocity, steps):
    """Integrate the geodesic ODE over [0, 1] from ``start``.

    Classical RK4 on the body velocity u' = -Gamma(u, u) coupled with
    per-step group reconstruction g <- g * exp(h * u_avg), where u_avg is
    the RK4-weighted stage average.  For an ad-invariant metric the body
    velocity is constant and the result matches start * exp(t * velocity)
    to integrator accuracy.  Returns the steps+1 visited elements.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    velocity = group.check_algebra(velocity)
    gamma = group.metric().christoffel

    def acc(u):
        return -np.einsum("ijk,i,j->k", gamma, u, u)

    h = 1.0 / steps
    out = np.empty((steps + 1,) + np.shape(start))
    out[0] = start
    g = np.asarray(start, dtype=np.float64)
    u = velocity
    for s in range(steps):
        k1 = acc(u)
        u2 = u + 0.5 * h * k1
        k2 = acc(u2)
        u3 = u + 0.5 * h * k2
        k3 = acc(u3)
        u4 = u + h * k3
        k4 = acc(u4)
        u_avg = (u + 2.0 * u2 + 2.0 * u3 + u4) / 6.0
        g = group.mul(g, group.exp(h * u_avg))
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[s + 1] = g
    return out


# ---------------------------------------------------------------------------
# Heisenberg geodesics


@dataclass(frozen=True, eq=False)
class HeisenbergGeodesicParams:
    """Parameters (a + i b, v, r) of a unit-speed Heisenberg geodesic.

    a and b are real n-vectors with |a + i b| = 1, v the winding rate and
    r > 0 the horizon; the curve is defined for arc length s in [0, r].
    """

    a: np.ndarray
    b: np.ndarray
    v: float
    r: float

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.b, dtype=np.float64))
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("a and b must be real vectors of equal length")
        norm = np.sqrt(np.sum(a * a) + np.sum(b * b))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("|a + ib| must be 1 within 1e-12")
        if not self.r > 0:
            raise ValueError("horizon r must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.a.shape[0]


def heisenberg_geodesic(params, s):
    """Evaluate the geodesic with the given parameters at arc length s.

    s may be a scalar or an array; the result stacks (xi, eta, t)
    coordinates along the last axis.  The straight-line branch applies
    when v = 0.
    """
    s = np.asarray(s, dtype=np.float64)
    a, b, v, r = params.a, params.b, params.v, params.r
    if v == 0.0:
        xi = a * s[..., None]
        eta = b * s[..., None]
        t = np.zeros(s.shape)
    else:
        w = v * s / r
        cw = 1.0 - np.cos(w)
        sw = np.sin(w)
        xi = (r / v) * (b * cw[..., None] + a * sw[..., None])
        eta = (r / v) * (-a * cw[..., None] + b * sw[..., None])
        t = (2.0 * r * r / (v * v)) * (w - sw)
    return np.concatenate([xi, eta, t[..., None]], axis=-1)


def heisenberg_geodesic_velocity(params, s):
    """Analytic derivative d gamma / ds; the (xi, eta) block is the
    horizontal velocity, whose Euclidean norm is identically 1."""
    s = np.asarray(s, dtype=np.float64)
    a, b, v, r = params.a, params.b, params.v, params.r
    if v == 0.0:
        xi = np.broadcast_to(a, s.shape + a.shape).copy()
        eta = np.broadcast_to(b, s.shape + b.shape).copy()
        t = np.zeros(s.shape)
    else:
        w = v * s / r
        cw = np.cos(w)
        sw = np.sin(w)
        xi = b * sw[..., None] + a * cw[..., None]
        eta = -a * sw[..., None] + b * cw[..., None]
        t = (2.0 * r / v) * (1.0 - cw)
    return np.concatenate([xi, eta, t[..., None]], axis=-1)
