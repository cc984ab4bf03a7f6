"""Pure-numpy implementations of the hot kernels.

Every function here has a numba twin in ``_accel_nb`` with the same
signature and the same branch thresholds; ``pathflow.accel`` picks one
set at import time.  Keep the two files in sync.
"""

import numpy as np

TWO_PI = 2.0 * np.pi

# branch guards for the rotation logarithm
SMALL_ANGLE = 1e-4          # Taylor series below this angle
NEAR_PI = np.pi - 1e-4      # symmetric-part axis extraction above this
AXIS_SIGN_FLOOR = 1e-10     # below this |sin| the half-turn tie-break applies


def wrap_angles(x):
    """Reduce angles to the canonical interval [-pi, pi)."""
    out = np.mod(np.asarray(x, dtype=np.float64) + np.pi, TWO_PI) - np.pi
    # float rounding in mod can land exactly on +pi; fold it back
    return np.where(out >= np.pi, out - TWO_PI, out)


def so3_exp_batch(coords):
    """Rotation matrices for axis-angle vectors, shape (M, 3) -> (M, 3, 3)."""
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    m = coords.shape[0]
    theta = np.sqrt(np.einsum("md,md->m", coords, coords))
    t2 = theta * theta
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - t2 / 6.0, np.sin(theta) / safe)
    b = np.where(small, 0.5 - t2 / 24.0, (1.0 - np.cos(theta)) / (safe * safe))
    k = np.zeros((m, 3, 3))
    k[:, 0, 1] = -coords[:, 2]
    k[:, 0, 2] = coords[:, 1]
    k[:, 1, 0] = coords[:, 2]
    k[:, 1, 2] = -coords[:, 0]
    k[:, 2, 0] = -coords[:, 1]
    k[:, 2, 1] = coords[:, 0]
    k2 = k @ k
    out = a[:, None, None] * k + b[:, None, None] * k2
    out[:, 0, 0] += 1.0
    out[:, 1, 1] += 1.0
    out[:, 2, 2] += 1.0
    return out


def _half_turn_axis(r, cos_t):
    """Axis of a rotation with angle near pi, from the symmetric part."""
    w = 0.5 * (r + r.T)
    m = (w - cos_t * np.eye(3)) / (1.0 - cos_t)
    j = int(np.argmax(np.diag(m)))
    u = m[:, j] / np.sqrt(max(m[j, j], 1e-300))
    return u / np.linalg.norm(u)


def _lex_positive(u):
    """Pick the lexicographically larger of u and -u."""
    for i in range(3):
        if u[i] > 0.0:
            return u
        if u[i] < 0.0:
            return -u
    return u


def so3_log_batch(rot):
    """Axis-angle vectors for rotation matrices, shape (M, 3, 3) -> (M, 3).

    The angle comes from atan2 of the skew and trace parts, which stays
    well conditioned at both ends of [0, pi].  Half turns take the
    deterministic lexicographic axis representative.
    """
    rot = np.ascontiguousarray(rot, dtype=np.float64)
    m = rot.shape[0]
    vee = np.empty((m, 3))
    vee[:, 0] = rot[:, 2, 1] - rot[:, 1, 2]
    vee[:, 1] = rot[:, 0, 2] - rot[:, 2, 0]
    vee[:, 2] = rot[:, 1, 0] - rot[:, 0, 1]
    sin_t = 0.5 * np.sqrt(np.einsum("md,md->m", vee, vee))
    cos_t = 0.5 * (rot[:, 0, 0] + rot[:, 1, 1] + rot[:, 2, 2] - 1.0)
    theta = np.arctan2(sin_t, cos_t)

    out = np.empty((m, 3))
    small = theta < SMALL_ANGLE
    big = theta > NEAR_PI
    mid = ~(small | big)

    t2 = theta * theta
    out[small] = vee[small] * (0.5 + t2[small] / 12.0)[:, None]
    out[mid] = vee[mid] * (theta[mid] / (2.0 * sin_t[mid]))[:, None]
    for i in np.nonzero(big)[0]:
        u = _half_turn_axis(rot[i], cos_t[i])
        if sin_t[i] > AXIS_SIGN_FLOOR:
            if u[0] * vee[i, 0] + u[1] * vee[i, 1] + u[2] * vee[i, 2] < 0.0:
                u = -u
        else:
            u = _lex_positive(u)
        out[i] = theta[i] * u
    return out


def so3_angle_batch(a, b):
    """Geodesic angles between paired rotations, (M,3,3),(M,3,3) -> (M,)."""
    rel = np.swapaxes(a, -1, -2) @ b
    s0 = rel[:, 2, 1] - rel[:, 1, 2]
    s1 = rel[:, 0, 2] - rel[:, 2, 0]
    s2 = rel[:, 1, 0] - rel[:, 0, 1]
    sin_t = 0.5 * np.sqrt(s0 * s0 + s1 * s1 + s2 * s2)
    cos_t = 0.5 * (rel[:, 0, 0] + rel[:, 1, 1] + rel[:, 2, 2] - 1.0)
    return np.arctan2(sin_t, cos_t)


def torus_cost_matrix(src, tgt, weights, p):
    """Pairwise L2-path distances to the power p on the torus.

    src: (n, K, d) angles, tgt: (m, K, d) angles, weights: (K,) quadrature.
    """
    diff = src[:, None, :, :] - tgt[None, :, :, :]
    diff = diff - TWO_PI * np.floor(diff / TWO_PI + 0.5)
    rho2 = np.einsum("nmkd,nmkd->nmk", diff, diff)
    l2 = np.sqrt(np.einsum("nmk,k->nm", rho2, weights))
    return l2 ** p


def so3_cost_matrix(src, tgt, weights, p):
    """Pairwise L2-path distances to the power p on the rotation group.

    src: (n, K, 3, 3), tgt: (m, K, 3, 3), weights: (K,) quadrature.
    """
    rel = np.einsum("nkji,mkjl->nmkil", src, tgt)
    s0 = rel[..., 2, 1] - rel[..., 1, 2]
    s1 = rel[..., 0, 2] - rel[..., 2, 0]
    s2 = rel[..., 1, 0] - rel[..., 0, 1]
    sin_t = 0.5 * np.sqrt(s0 * s0 + s1 * s1 + s2 * s2)
    cos_t = 0.5 * (rel[..., 0, 0] + rel[..., 1, 1] + rel[..., 2, 2] - 1.0)
    theta = np.arctan2(sin_t, cos_t)
    l2 = np.sqrt(np.einsum("nmk,k->nm", theta * theta, weights))
    return l2 ** p


def _logsumexp(mat, axis):
    mx = np.max(mat, axis=axis, keepdims=True)
    return np.squeeze(mx, axis=axis) + np.log(
        np.sum(np.exp(mat - mx), axis=axis)
    )


def sinkhorn_log(cost, a, b, eps, max_iter, tol, f0, g0):
    """Log-domain Sinkhorn scaling; returns (f, g, iterations, violation).

    Starts from the potentials (f0, g0), which lets callers anneal the
    regularization.  Marginal violation is the summed L1 gap of the
    current plan's row and column sums against a and b.
    """
    loga = np.log(a)
    logb = np.log(b)
    f = f0.copy()
    g = g0.copy()
    violation = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        f = -eps * _logsumexp((g[None, :] - cost) / eps + logb[None, :], axis=1)
        g = -eps * _logsumexp((f[:, None] - cost) / eps + loga[:, None], axis=0)
        plan = np.exp(
            (f[:, None] + g[None, :] - cost) / eps + loga[:, None] + logb[None, :]
        )
        violation = np.sum(np.abs(plan.sum(axis=1) - a)) + np.sum(
            np.abs(plan.sum(axis=0) - b)
        )
        if violation <= tol:
            break
    return f, g, it, violation
