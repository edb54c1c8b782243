"""Pure-Python/numpy implementation of the hot evaluation kernels.

Reference implementation for the compiled core in ``_core.pyx``.  Every
function here has the same signature and semantics as its compiled
counterpart; the selector in ``henonlab._kernel`` picks whichever is
available (or forced via HENONLAB_PURE=1).
"""

from __future__ import annotations

import numpy as np


def cheb_eval(c, a, b, x):
    """Clenshaw evaluation of a Chebyshev series on [a, b].

    ``x`` may be a scalar or an ndarray; the return matches its shape.
    """
    c = np.asarray(c, dtype=np.float64)
    t = (2.0 * np.asarray(x, dtype=np.float64) - (a + b)) / (b - a)
    t2 = 2.0 * t
    b0 = np.zeros_like(t)
    b1 = np.zeros_like(t)
    for k in range(len(c) - 1, 0, -1):
        b0, b1 = t2 * b0 - b1 + c[k], b0
    out = t * b0 - b1 + c[0]
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def cheb_eval_2d(C, ax, bx, ay, by, x, y):
    """Evaluate a tensor Chebyshev series on [ax,bx] x [ay,by] at (x, y).

    ``x`` and ``y`` broadcast against each other.
    """
    C = np.asarray(C, dtype=np.float64)
    # Clenshaw along y for each row of coefficients, then along x.
    ty = (2.0 * np.asarray(y, dtype=np.float64) - (ay + by)) / (by - ay)
    ty2 = 2.0 * ty
    ny = C.shape[1]
    # rowvals[i] = sum_j C[i, j] T_j(ty)
    b0 = np.zeros(np.broadcast(ty, 0.0).shape + (C.shape[0],))
    b1 = np.zeros_like(b0)
    for j in range(ny - 1, 0, -1):
        b0, b1 = ty2[..., None] * b0 - b1 + C[:, j], b0
    rowvals = ty[..., None] * b0 - b1 + C[:, 0]

    tx = (2.0 * np.asarray(x, dtype=np.float64) - (ax + bx)) / (bx - ax)
    tx2 = 2.0 * tx
    nx = C.shape[0]
    a0 = np.zeros(np.broadcast(tx, ty).shape)
    a1 = np.zeros_like(a0)
    for i in range(nx - 1, 0, -1):
        a0, a1 = tx2 * a0 - a1 + rowvals[..., i], a0
    out = tx * a0 - a1 + rowvals[..., 0]
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(out)
    return out


def std_orbit(c, b, x, y, n):
    """n steps of the standard family (x, y) -> (c x (1-x) - b y, x)."""
    for _ in range(n):
        x, y = c * x * (1.0 - x) - b * y, x
        if not (-10.0 < x < 10.0):
            return np.nan, np.nan
    return x, y


def std_orbit_points(c, b, x, y, n):
    """Full orbit as an (n+1, 2) array, starting at (x, y)."""
    out = np.empty((n + 1, 2))
    out[0] = x, y
    for i in range(1, n + 1):
        x, y = c * x * (1.0 - x) - b * y, x
        out[i] = x, y
    return out


def std_power2_period(c, b, x, y, settle, dmax, tol):
    """Smallest d such that the settled orbit is 2^d-recurrent.

    Iterates ``settle`` steps, then records 3 * 2^dmax points and returns
    the smallest d <= dmax with |z_{i + 2^d} - z_i| < tol over a full
    cycle window.  Returns -1 if the orbit escapes and 99 if no power of
    two up to dmax recurs.
    """
    for _ in range(settle):
        x, y = c * x * (1.0 - x) - b * y, x
        if not (-10.0 < x < 10.0):
            return -1
    pmax = 1 << dmax
    m = 3 * pmax
    ref = np.empty((m + 1, 2))
    ref[0] = x, y
    for i in range(1, m + 1):
        x, y = c * x * (1.0 - x) - b * y, x
        if not (-10.0 < x < 10.0):
            return -1
        ref[i] = x, y
    for d in range(dmax + 1):
        p = 1 << d
        err = np.abs(ref[p : 2 * p, :] - ref[:p, :]).max()
        if err < tol:
            return d
    return 99


def std_orbit_jac(c, b, x, y, n):
    """Orbit endpoint and Jacobian product over n steps.

    Returns (x, y, m11, m12, m21, m22) where M = DF(z_{n-1}) ... DF(z_0).
    """
    m11, m12, m21, m22 = 1.0, 0.0, 0.0, 1.0
    for _ in range(n):
        a = c * (1.0 - 2.0 * x)
        # DF = [[a, -b], [1, 0]]
        m11, m12, m21, m22 = (
            a * m11 - b * m21,
            a * m12 - b * m22,
            m11,
            m12,
        )
        x, y = c * x * (1.0 - x) - b * y, x
    return x, y, m11, m12, m21, m22


def std_orbit_dc(c, b, x, y, n):
    """Orbit endpoint and its derivative with respect to c over n steps.

    Returns (x, y, dx, dy) with (dx, dy) = d/dc of F_c^n(x, y) at fixed
    start point.
    """
    dx, dy = 0.0, 0.0
    for _ in range(n):
        dx, dy = x * (1.0 - x) + c * (1.0 - 2.0 * x) * dx - b * dy, dx
        x, y = c * x * (1.0 - x) - b * y, x
    return x, y, dx, dy


def henon_eval_many(fc, fa, fb, etaC, eax, ebx, eay, eby, X, Y):
    """Vectorized evaluation of (f(x) - y*eta(x,y), x) in spectral form."""
    fx = cheb_eval(fc, fa, fb, X)
    if etaC is None:
        e = 0.0
    else:
        e = np.asarray(Y) * cheb_eval_2d(etaC, eax, ebx, eay, eby, X, Y)
    return fx - e, np.asarray(X, dtype=np.float64).copy()


def henon_orbit_logjac(fc, fa, fb, etaC, detaC, eax, ebx, eay, eby, x, y, n):
    """Orbit of a spectral Henon-like map accumulating sum of log|jac|.

    jac(x, y) = eta(x, y) + y * d_y eta(x, y).  Returns (x, y, logsum);
    logsum is -inf if the Jacobian vanishes on the orbit.
    """
    logsum = 0.0
    for _ in range(n):
        eta = cheb_eval_2d(etaC, eax, ebx, eay, eby, x, y)
        deta = cheb_eval_2d(detaC, eax, ebx, eay, eby, x, y)
        jac = eta + y * deta
        if jac == 0.0:
            logsum = -np.inf
        else:
            logsum += np.log(abs(jac))
        x, y = cheb_eval(fc, fa, fb, x) - y * eta, x
    return x, y, logsum
