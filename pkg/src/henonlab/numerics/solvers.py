"""Root finding and Newton iteration in coefficient space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from henonlab.errors import BracketError, ConvergenceError
from henonlab.numerics.spectral import DEFAULT_PRECISION, Precision

_EPS = float(np.finfo(np.float64).eps)
FD_STEP = _EPS ** (1.0 / 3.0)  # centered-difference step factor


def root_1d(
    g, bracket, prec: Precision = DEFAULT_PRECISION, dg=None,
    residual_check: bool = True,
) -> float:
    """Root of a continuous scalar function on a bracketing interval.

    Uses Brent bracketing when the endpoint signs differ, followed by a
    Newton/secant polish until |g(root)| < prec.abs_tol.  With ``dg``
    supplied and no sign change, falls back to damped Newton from the
    midpoint.  ``residual_check=False`` trusts Brent's x-convergence and
    skips the |g| test (for steep amplified readouts whose noise floor
    exceeds abs_tol while the root position is fully resolved).
    """
    a, b = float(bracket[0]), float(bracket[1])
    if a > b:
        a, b = b, a
    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if np.sign(ga) * np.sign(gb) < 0:
        x = brentq(g, a, b, xtol=1e-15, rtol=8 * _EPS, maxiter=200)
        if not residual_check:
            return float(x)
    elif dg is not None:
        x = 0.5 * (a + b)
        for _ in range(100):
            gx = g(x)
            if abs(gx) < prec.abs_tol:
                break
            d = dg(x)
            if d == 0.0:
                raise ConvergenceError("Newton derivative vanished in root_1d")
            step = gx / d
            x = min(max(x - step, a), b)
        else:
            raise ConvergenceError("root_1d Newton did not converge")
    else:
        raise BracketError(
            f"no sign change on [{a}, {b}] (g={ga:.3e}, {gb:.3e}) "
            "and no derivative supplied"
        )
    # Polish: |g| may still exceed abs_tol if g is extremely steep.
    gx = g(x)
    if abs(gx) >= prec.abs_tol:
        for _ in range(50):
            if dg is not None:
                d = dg(x)
            else:
                h = FD_STEP * max(abs(x), 1.0)
                d = (g(x + h) - g(x - h)) / (2.0 * h)
            if d == 0.0:
                break
            x = x - gx / d
            gx = g(x)
            if abs(gx) < prec.abs_tol:
                break
    gx = g(x)
    if not abs(gx) < prec.abs_tol:
        raise ConvergenceError(f"root_1d residual {gx:.3e} above abs_tol")
    return float(x)


@dataclass
class NewtonResult:
    """Convergence report for a coefficient-space Newton solve."""

    x: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def fd_jacobian(fn, x, f0=None, step=None):
    """Forward-difference Jacobian of fn at x."""
    x = np.asarray(x, dtype=np.float64)
    if f0 is None:
        f0 = np.asarray(fn(x), dtype=np.float64)
    n = x.size
    m = np.asarray(f0).size
    J = np.empty((m, n))
    for j in range(n):
        h = (step or np.sqrt(_EPS)) * max(abs(x[j]), 1.0)
        xp = x.copy()
        xp[j] += h
        J[:, j] = (np.asarray(fn(xp)) - f0) / h
    return J


def newton_coeff_space(
    residual,
    seed,
    prec: Precision = DEFAULT_PRECISION,
    jac=None,
    max_iter: int = 40,
    fd_step: float | None = None,
) -> NewtonResult:
    """Newton's method on a residual map between coefficient vectors.

    The Jacobian comes from ``jac`` when supplied, otherwise forward
    differences.  Steps are damped by simple backtracking when the full
    step does not reduce the residual norm.  Raises ConvergenceError on a
    singular Jacobian or on divergence; the partial NewtonResult rides on
    the exception.
    """
    x = np.array(seed, dtype=np.float64).ravel()
    r = np.atleast_1d(np.asarray(residual(x), dtype=np.float64))
    norm = float(np.linalg.norm(r, ord=np.inf))
    history = [norm]
    best = (x.copy(), norm)
    for it in range(1, max_iter + 1):
        if norm < prec.abs_tol:
            return NewtonResult(x, norm, it - 1, True, history)
        J = jac(x) if jac is not None else fd_jacobian(residual, x, r, fd_step)
        J = np.atleast_2d(np.asarray(J, dtype=np.float64))
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(
                "singular Jacobian in newton_coeff_space",
                NewtonResult(x, norm, it - 1, False, history),
            ) from exc
        lam = 1.0
        for _ in range(8):
            xn = x - lam * step
            rn = np.atleast_1d(np.asarray(residual(xn), dtype=np.float64))
            nn = float(np.linalg.norm(rn, ord=np.inf))
            if nn < norm or nn < prec.abs_tol:
                break
            lam *= 0.5
        x, r, norm = xn, rn, nn
        history.append(norm)
        if norm < best[1]:
            best = (x.copy(), norm)
        if norm > 1e6 * (history[0] + 1.0) or not np.isfinite(norm):
            raise ConvergenceError(
                "newton_coeff_space diverged",
                NewtonResult(best[0], best[1], it, False, history),
            )
    if norm < prec.abs_tol:
        return NewtonResult(x, norm, max_iter, True, history)
    raise ConvergenceError(
        f"newton_coeff_space: residual {norm:.3e} after {max_iter} iterations",
        NewtonResult(best[0], best[1], max_iter, False, history),
    )


def central_diff(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def central_diff_with_error(fn, x, h0):
    """Centered difference with a step-halving (Richardson) error bar.

    Returns (derivative, error_estimate) using steps h0 and h0/2; the
    Richardson-extrapolated value is returned and the difference between
    the two raw estimates serves as the error bar.
    """
    d1 = central_diff(fn, x, h0)
    d2 = central_diff(fn, x, 0.5 * h0)
    extrap = d2 + (d2 - d1) / 3.0
    return extrap, abs(d2 - d1)
