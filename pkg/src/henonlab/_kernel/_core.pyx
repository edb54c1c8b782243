# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels: Chebyshev Clenshaw sums and orbit loops.

Semantics match henonlab._kernel._pure exactly; see that module for the
reference implementation and docstrings.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log

cnp.import_array()


cdef double _clenshaw(const double[::1] c, double a, double b, double x) nogil:
    cdef double t = (2.0 * x - (a + b)) / (b - a)
    cdef double t2 = 2.0 * t
    cdef double b0 = 0.0, b1 = 0.0, tmp
    cdef Py_ssize_t k
    for k in range(c.shape[0] - 1, 0, -1):
        tmp = t2 * b0 - b1 + c[k]
        b1 = b0
        b0 = tmp
    return t * b0 - b1 + c[0]


cdef double _clenshaw2d(const double[:, ::1] C, double ax, double bx,
                        double ay, double by, double x, double y) nogil:
    cdef double ty = (2.0 * y - (ay + by)) / (by - ay)
    cdef double ty2 = 2.0 * ty
    cdef double tx = (2.0 * x - (ax + bx)) / (bx - ax)
    cdef double tx2 = 2.0 * tx
    cdef Py_ssize_t i, j, nx = C.shape[0], ny = C.shape[1]
    cdef double b0, b1, tmp, row
    cdef double a0 = 0.0, a1 = 0.0
    for i in range(nx - 1, -1, -1):
        b0 = 0.0
        b1 = 0.0
        for j in range(ny - 1, 0, -1):
            tmp = ty2 * b0 - b1 + C[i, j]
            b1 = b0
            b0 = tmp
        row = ty * b0 - b1 + C[i, 0]
        if i > 0:
            tmp = tx2 * a0 - a1 + row
            a1 = a0
            a0 = tmp
        else:
            return tx * a0 - a1 + row
    return 0.0


def cheb_eval(c, double a, double b, x):
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] xv
    cdef double[::1] out
    cdef Py_ssize_t i, n
    if np.ndim(x) == 0:
        return _clenshaw(cv, a, b, float(x))
    xarr = np.ascontiguousarray(x, dtype=np.float64)
    shape = xarr.shape
    xv = xarr.ravel()
    n = xv.shape[0]
    res = np.empty(n, dtype=np.float64)
    out = res
    for i in range(n):
        out[i] = _clenshaw(cv, a, b, xv[i])
    return res.reshape(shape)


def cheb_eval_2d(C, double ax, double bx, double ay, double by, x, y):
    cdef double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef double[::1] xv, yv, out
    cdef Py_ssize_t i, n
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return _clenshaw2d(Cv, ax, bx, ay, by, float(x), float(y))
    xb, yb = np.broadcast_arrays(np.asarray(x, dtype=np.float64),
                                 np.asarray(y, dtype=np.float64))
    shape = xb.shape
    xv = np.ascontiguousarray(xb).ravel()
    yv = np.ascontiguousarray(yb).ravel()
    n = xv.shape[0]
    res = np.empty(n, dtype=np.float64)
    out = res
    for i in range(n):
        out[i] = _clenshaw2d(Cv, ax, bx, ay, by, xv[i], yv[i])
    return res.reshape(shape)


def std_orbit(double c, double b, double x, double y, Py_ssize_t n):
    cdef Py_ssize_t i
    cdef double xn
    for i in range(n):
        xn = c * x * (1.0 - x) - b * y
        y = x
        x = xn
        if not (-10.0 < x < 10.0):
            return np.nan, np.nan
    return x, y


def std_orbit_points(double c, double b, double x, double y, Py_ssize_t n):
    out = np.empty((n + 1, 2), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i
    cdef double xn
    ov[0, 0] = x
    ov[0, 1] = y
    for i in range(1, n + 1):
        xn = c * x * (1.0 - x) - b * y
        y = x
        x = xn
        ov[i, 0] = x
        ov[i, 1] = y
    return out


def std_power2_period(double c, double b, double x, double y,
                      Py_ssize_t settle, int dmax, double tol):
    cdef Py_ssize_t i, p, m
    cdef int d
    cdef double xn, err, e
    for i in range(settle):
        xn = c * x * (1.0 - x) - b * y
        y = x
        x = xn
        if not (-10.0 < x < 10.0):
            return -1
    m = 3 * (1 << dmax)
    ref = np.empty((m + 1, 2), dtype=np.float64)
    cdef double[:, ::1] rv = ref
    rv[0, 0] = x
    rv[0, 1] = y
    for i in range(1, m + 1):
        xn = c * x * (1.0 - x) - b * y
        y = x
        x = xn
        if not (-10.0 < x < 10.0):
            return -1
        rv[i, 0] = x
        rv[i, 1] = y
    for d in range(dmax + 1):
        p = 1 << d
        err = 0.0
        for i in range(p):
            e = fabs(rv[i + p, 0] - rv[i, 0])
            if e > err:
                err = e
            e = fabs(rv[i + p, 1] - rv[i, 1])
            if e > err:
                err = e
        if err < tol:
            return d
    return 99


def std_orbit_jac(double c, double b, double x, double y, Py_ssize_t n):
    cdef double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0
    cdef double a, n11, n12, xn
    cdef Py_ssize_t i
    for i in range(n):
        a = c * (1.0 - 2.0 * x)
        n11 = a * m11 - b * m21
        n12 = a * m12 - b * m22
        m21 = m11
        m22 = m12
        m11 = n11
        m12 = n12
        xn = c * x * (1.0 - x) - b * y
        y = x
        x = xn
    return x, y, m11, m12, m21, m22


def std_orbit_dc(double c, double b, double x, double y, Py_ssize_t n):
    cdef double dx = 0.0, dy = 0.0, dxn, xn
    cdef Py_ssize_t i
    for i in range(n):
        dxn = x * (1.0 - x) + c * (1.0 - 2.0 * x) * dx - b * dy
        dy = dx
        dx = dxn
        xn = c * x * (1.0 - x) - b * y
        y = x
        x = xn
    return x, y, dx, dy


def henon_eval_many(fc, double fa, double fb, etaC,
                    double eax, double ebx, double eay, double eby, X, Y):
    cdef double[::1] cv = np.ascontiguousarray(fc, dtype=np.float64)
    xb, yb = np.broadcast_arrays(np.asarray(X, dtype=np.float64),
                                 np.asarray(Y, dtype=np.float64))
    shape = xb.shape
    cdef double[::1] xv = np.ascontiguousarray(xb).ravel()
    cdef double[::1] yv = np.ascontiguousarray(yb).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    xout = np.empty(n, dtype=np.float64)
    yout = np.empty(n, dtype=np.float64)
    cdef double[::1] xo = xout, yo = yout
    cdef double[:, ::1] Ev
    if etaC is None:
        for i in range(n):
            xo[i] = _clenshaw(cv, fa, fb, xv[i])
            yo[i] = xv[i]
    else:
        Ev = np.ascontiguousarray(etaC, dtype=np.float64)
        for i in range(n):
            xo[i] = _clenshaw(cv, fa, fb, xv[i]) - yv[i] * _clenshaw2d(
                Ev, eax, ebx, eay, eby, xv[i], yv[i])
            yo[i] = xv[i]
    return xout.reshape(shape), yout.reshape(shape)


def henon_orbit_logjac(fc, double fa, double fb, etaC, detaC,
                       double eax, double ebx, double eay, double eby,
                       double x, double y, Py_ssize_t n):
    cdef double[::1] cv = np.ascontiguousarray(fc, dtype=np.float64)
    cdef double[:, ::1] Ev = np.ascontiguousarray(etaC, dtype=np.float64)
    cdef double[:, ::1] Dv = np.ascontiguousarray(detaC, dtype=np.float64)
    cdef double logsum = 0.0, eta, deta, jac, xn
    cdef bint dead = False
    cdef Py_ssize_t i
    for i in range(n):
        eta = _clenshaw2d(Ev, eax, ebx, eay, eby, x, y)
        deta = _clenshaw2d(Dv, eax, ebx, eay, eby, x, y)
        jac = eta + y * deta
        if jac == 0.0:
            dead = True
        else:
            logsum += log(fabs(jac))
        xn = _clenshaw(cv, fa, fb, x) - y * eta
        y = x
        x = xn
    if dead:
        return x, y, -np.inf
    return x, y, logsum
