"""Numba-compiled twins of the kernels in ``_accel_np``.

Same signatures, same branch thresholds, scalar loops instead of
broadcasting.  fastmath stays off so the tie-breaks and the exact
cancellations keep IEEE semantics.
"""

import numpy as np
from numba import njit

from ._accel_np import AXIS_SIGN_FLOOR, NEAR_PI, SMALL_ANGLE, TWO_PI, wrap_angles

__all__ = [
    "wrap_angles",
    "so3_exp_batch",
    "so3_log_batch",
    "so3_angle_batch",
    "torus_cost_matrix",
    "so3_cost_matrix",
    "sinkhorn_log",
]


@njit(cache=True)
def so3_exp_batch(coords):
    m = coords.shape[0]
    out = np.empty((m, 3, 3))
    for i in range(m):
        x, y, z = coords[i, 0], coords[i, 1], coords[i, 2]
        t2 = x * x + y * y + z * z
        theta = np.sqrt(t2)
        if theta < SMALL_ANGLE:
            a = 1.0 - t2 / 6.0
            b = 0.5 - t2 / 24.0
        else:
            a = np.sin(theta) / theta
            b = (1.0 - np.cos(theta)) / t2
        out[i, 0, 0] = 1.0 + b * (-z * z - y * y)
        out[i, 0, 1] = -a * z + b * x * y
        out[i, 0, 2] = a * y + b * x * z
        out[i, 1, 0] = a * z + b * x * y
        out[i, 1, 1] = 1.0 + b * (-z * z - x * x)
        out[i, 1, 2] = -a * x + b * y * z
        out[i, 2, 0] = -a * y + b * x * z
        out[i, 2, 1] = a * x + b * y * z
        out[i, 2, 2] = 1.0 + b * (-y * y - x * x)
    return out


@njit(cache=True)
def so3_log_batch(rot):
    m = rot.shape[0]
    out = np.empty((m, 3))
    for i in range(m):
        v0 = rot[i, 2, 1] - rot[i, 1, 2]
        v1 = rot[i, 0, 2] - rot[i, 2, 0]
        v2 = rot[i, 1, 0] - rot[i, 0, 1]
        sin_t = 0.5 * np.sqrt(v0 * v0 + v1 * v1 + v2 * v2)
        cos_t = 0.5 * (rot[i, 0, 0] + rot[i, 1, 1] + rot[i, 2, 2] - 1.0)
        theta = np.arctan2(sin_t, cos_t)
        if theta < SMALL_ANGLE:
            fac = 0.5 + theta * theta / 12.0
            out[i, 0] = v0 * fac
            out[i, 1] = v1 * fac
            out[i, 2] = v2 * fac
        elif theta <= NEAR_PI:
            fac = theta / (2.0 * sin_t)
            out[i, 0] = v0 * fac
            out[i, 1] = v1 * fac
            out[i, 2] = v2 * fac
        else:
            # axis from the symmetric part: (sym(R) - cos*I)/(1 - cos) = u u^T
            denom = 1.0 - cos_t
            best = -1.0
            jbest = 0
            for j in range(3):
                diag = (rot[i, j, j] - cos_t) / denom
                if diag > best:
                    best = diag
                    jbest = j
            u = np.empty(3)
            for k in range(3):
                if k == jbest:
                    u[k] = best
                else:
                    u[k] = 0.5 * (rot[i, k, jbest] + rot[i, jbest, k]) / denom
            nrm = np.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
            for k in range(3):
                u[k] /= nrm
            if sin_t > AXIS_SIGN_FLOOR:
                if u[0] * v0 + u[1] * v1 + u[2] * v2 < 0.0:
                    for k in range(3):
                        u[k] = -u[k]
            else:
                for k in range(3):
                    if u[k] > 0.0:
                        break
                    if u[k] < 0.0:
                        for l in range(3):
                            u[l] = -u[l]
                        break
            out[i, 0] = theta * u[0]
            out[i, 1] = theta * u[1]
            out[i, 2] = theta * u[2]
    return out


@njit(cache=True)
def so3_angle_batch(a, b):
    m = a.shape[0]
    out = np.empty(m)
    for i in range(m):
        tr = 0.0
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        # rel = a[i]^T b[i]; only trace and skew part needed
        r00 = a[i, 0, 0] * b[i, 0, 0] + a[i, 1, 0] * b[i, 1, 0] + a[i, 2, 0] * b[i, 2, 0]
        r11 = a[i, 0, 1] * b[i, 0, 1] + a[i, 1, 1] * b[i, 1, 1] + a[i, 2, 1] * b[i, 2, 1]
        r22 = a[i, 0, 2] * b[i, 0, 2] + a[i, 1, 2] * b[i, 1, 2] + a[i, 2, 2] * b[i, 2, 2]
        r21 = a[i, 0, 2] * b[i, 0, 1] + a[i, 1, 2] * b[i, 1, 1] + a[i, 2, 2] * b[i, 2, 1]
        r12 = a[i, 0, 1] * b[i, 0, 2] + a[i, 1, 1] * b[i, 1, 2] + a[i, 2, 1] * b[i, 2, 2]
        r02 = a[i, 0, 0] * b[i, 0, 2] + a[i, 1, 0] * b[i, 1, 2] + a[i, 2, 0] * b[i, 2, 2]
        r20 = a[i, 0, 2] * b[i, 0, 0] + a[i, 1, 2] * b[i, 1, 0] + a[i, 2, 2] * b[i, 2, 0]
        r10 = a[i, 0, 1] * b[i, 0, 0] + a[i, 1, 1] * b[i, 1, 0] + a[i, 2, 1] * b[i, 2, 0]
        r01 = a[i, 0, 0] * b[i, 0, 1] + a[i, 1, 0] * b[i, 1, 1] + a[i, 2, 0] * b[i, 2, 1]
        tr = r00 + r11 + r22
        s0 = r21 - r12
        s1 = r02 - r20
        s2 = r10 - r01
        sin_t = 0.5 * np.sqrt(s0 * s0 + s1 * s1 + s2 * s2)
        cos_t = 0.5 * (tr - 1.0)
        out[i] = np.arctan2(sin_t, cos_t)
    return out


@njit(cache=True)
def torus_cost_matrix(src, tgt, weights, p):
    n, kk, d = src.shape
    m = tgt.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(kk):
                rho2 = 0.0
                for c in range(d):
                    diff = src[i, k, c] - tgt[j, k, c]
                    diff = diff - TWO_PI * np.floor(diff / TWO_PI + 0.5)
                    rho2 += diff * diff
                acc += weights[k] * rho2
            out[i, j] = np.sqrt(acc) ** p
    return out


@njit(cache=True)
def so3_cost_matrix(src, tgt, weights, p):
    n, kk = src.shape[0], src.shape[1]
    m = tgt.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(kk):
                tr = 0.0
                s0 = 0.0
                s1 = 0.0
                s2 = 0.0
                r00 = (
                    src[i, k, 0, 0] * tgt[j, k, 0, 0]
                    + src[i, k, 1, 0] * tgt[j, k, 1, 0]
                    + src[i, k, 2, 0] * tgt[j, k, 2, 0]
                )
                r11 = (
                    src[i, k, 0, 1] * tgt[j, k, 0, 1]
                    + src[i, k, 1, 1] * tgt[j, k, 1, 1]
                    + src[i, k, 2, 1] * tgt[j, k, 2, 1]
                )
                r22 = (
                    src[i, k, 0, 2] * tgt[j, k, 0, 2]
                    + src[i, k, 1, 2] * tgt[j, k, 1, 2]
                    + src[i, k, 2, 2] * tgt[j, k, 2, 2]
                )
                r21 = (
                    src[i, k, 0, 2] * tgt[j, k, 0, 1]
                    + src[i, k, 1, 2] * tgt[j, k, 1, 1]
                    + src[i, k, 2, 2] * tgt[j, k, 2, 1]
                )
                r12 = (
                    src[i, k, 0, 1] * tgt[j, k, 0, 2]
                    + src[i, k, 1, 1] * tgt[j, k, 1, 2]
                    + src[i, k, 2, 1] * tgt[j, k, 2, 2]
                )
                r02 = (
                    src[i, k, 0, 0] * tgt[j, k, 0, 2]
                    + src[i, k, 1, 0] * tgt[j, k, 1, 2]
                    + src[i, k, 2, 0] * tgt[j, k, 2, 2]
                )
                r20 = (
                    src[i, k, 0, 2] * tgt[j, k, 0, 0]
                    + src[i, k, 1, 2] * tgt[j, k, 1, 0]
                    + src[i, k, 2, 2] * tgt[j, k, 2, 0]
                )
                r10 = (
                    src[i, k, 0, 1] * tgt[j, k, 0, 0]
                    + src[i, k, 1, 1] * tgt[j, k, 1, 0]
                    + src[i, k, 2, 1] * tgt[j, k, 2, 0]
                )
                r01 = (
                    src[i, k, 0, 0] * tgt[j, k, 0, 1]
                    + src[i, k, 1, 0] * tgt[j, k, 1, 1]
                    + src[i, k, 2, 0] * tgt[j, k, 2, 1]
                )
                tr = r00 + r11 + r22
                s0 = r21 - r12
                s1 = r02 - r20
                s2 = r10 - r01
                sin_t = 0.5 * np.sqrt(s0 * s0 + s1 * s1 + s2 * s2)
                cos_t = 0.5 * (tr - 1.0)
                theta = np.arctan2(sin_t, cos_t)
                acc += weights[k] * theta * theta
            out[i, j] = np.sqrt(acc) ** p
    return out


@njit(cache=True)
def sinkhorn_log(cost, a, b, eps, max_iter, tol, f0, g0):
    n, m = cost.shape
    loga = np.log(a)
    logb = np.log(b)
    f = f0.copy()
    g = g0.copy()
    violation = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        for i in range(n):
            best = -np.inf
            for j in range(m):
                v = (g[j] - cost[i, j]) / eps + logb[j]
                if v > best:
                    best = v
            s = 0.0
            for j in range(m):
                s += np.exp((g[j] - cost[i, j]) / eps + logb[j] - best)
            f[i] = -eps * (best + np.log(s))
        for j in range(m):
            best = -np.inf
            for i in range(n):
                v = (f[i] - cost[i, j]) / eps + loga[i]
                if v > best:
                    best = v
            s = 0.0
            for i in range(n):
                s += np.exp((f[i] - cost[i, j]) / eps + loga[i] - best)
            g[j] = -eps * (best + np.log(s))
        violation = 0.0
        for i in range(n):
            row = 0.0
            for j in range(m):
                row += np.exp((f[i] + g[j] - cost[i, j]) / eps + loga[i] + logb[j])
            violation += abs(row - a[i])
        for j in range(m):
            col = 0.0
            for i in range(n):
                col += np.exp((f[i] + g[j] - cost[i, j]) / eps + loga[i] + logb[j])
            violation += abs(col - b[j])
        if violation <= tol:
            break
    return f, g, it, violation
