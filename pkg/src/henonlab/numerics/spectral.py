"""Chebyshev spectral representations on intervals and rectangles.

Analytic maps in this problem have geometrically decaying Chebyshev
coefficients, so truncation error is estimated cheaply from the trailing
tail of the coefficient vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from henonlab._kernel import cheb_eval, cheb_eval_2d
from henonlab.errors import ValidationError

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class Precision:
    """Working precision and solver tolerances.

    ``working_digits`` beyond 16 has no effect on the float64 kernels;
    quantities of size b**(2**n) that would underflow are handled in log
    space by the modules that need them.
    """

    working_digits: int = 15
    abs_tol: float = 1e-10
    rel_tol: float = 1e-12

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValidationError("tolerances must be positive")
        machine = 10.0 ** (-min(self.working_digits, 15.6))
        if self.abs_tol < 0.5 * machine:
            raise ValidationError(
                f"abs_tol {self.abs_tol} below machine epsilon for "
                f"{self.working_digits} working digits"
            )


DEFAULT_PRECISION = Precision()


def cheb_nodes(degree: int, a: float, b: float) -> np.ndarray:
    """First-kind Chebyshev nodes (degree + 1 of them) on [a, b], increasing."""
    k = np.arange(degree + 1)
    theta = np.pi * (2.0 * k + 1.0) / (2.0 * (degree + 1))
    return 0.5 * (a + b) + 0.5 * (b - a) * np.cos(theta)[::-1]


def _coeffs_from_values(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients interpolating values at first-kind nodes.

    ``values`` are ordered by increasing x, matching cheb_nodes.
    """
    v = np.asarray(values, dtype=np.float64)[::-1]  # node order: cos decreasing
    n = v.size
    k = np.arange(n)
    theta = np.pi * (2.0 * k + 1.0) / (2.0 * n)
    j = k[:, None]
    M = np.cos(j * theta[None, :])
    c = (2.0 / n) * M @ v
    c[0] *= 0.5
    return c


def _tail_bound(coeffs: np.ndarray) -> float:
    n = len(coeffs)
    ntail = max(1, n // 10)
    return float(np.sum(np.abs(coeffs[n - ntail :])))


@dataclass(frozen=True)
class SpectralFn1D:
    """Chebyshev series on an interval with a cached tail estimate."""

    coeffs: np.ndarray
    domain: tuple[float, float]
    tail_bound: float = field(default=0.0)

    def __post_init__(self):
        a, b = self.domain
        if not b > a:
            raise ValidationError(f"degenerate domain [{a}, {b}]")
        object.__setattr__(
            self, "coeffs", np.ascontiguousarray(self.coeffs, dtype=np.float64)
        )
        object.__setattr__(self, "tail_bound", _tail_bound(self.coeffs))

    @classmethod
    def from_callable(cls, fn, degree: int, domain: tuple[float, float]):
        xs = cheb_nodes(degree, *domain)
        return cls(_coeffs_from_values(fn(xs)), domain)

    @classmethod
    def from_values(cls, values, domain: tuple[float, float]):
        return cls(_coeffs_from_values(values), domain)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return cheb_eval(self.coeffs, self.domain[0], self.domain[1], x)

    def deriv(self) -> "SpectralFn1D":
        a, b = self.domain
        dc = _cheb.chebder(self.coeffs) * (2.0 / (b - a))
        if len(dc) == 0:
            dc = np.zeros(1)
        return SpectralFn1D(dc, self.domain)

    def nodes(self) -> np.ndarray:
        return cheb_nodes(self.degree, *self.domain)


def fit_1d(samples, degree: int, rel_tol: float = 1e-9) -> SpectralFn1D:
    """Interpolate samples taken at the first-kind Chebyshev nodes.

    ``samples`` is a sequence of (x, value) pairs covering all degree + 1
    nodes of the interval they span.  The interpolant is verified to
    reproduce the samples to rel_tol (relative to the value scale).
    """
    pts = sorted((float(x), float(v)) for x, v in samples)
    xs = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if len(xs) != degree + 1:
        raise ValidationError(
            f"expected {degree + 1} samples for degree {degree}, got {len(xs)}"
        )
    # Recover the interval from the outermost nodes: for first-kind nodes
    # the ends are inset by half a node gap.
    theta0 = np.pi / (2.0 * (degree + 1))
    half = (xs[-1] - xs[0]) / (2.0 * np.cos(theta0)) if degree > 0 else 0.0
    if degree == 0:
        dom = (xs[0] - 0.5, xs[0] + 0.5)
    else:
        mid = 0.5 * (xs[0] + xs[-1])
        dom = (mid - half, mid + half)
    if not dom[1] > dom[0]:
        raise ValidationError("degenerate domain from samples")
    expected = cheb_nodes(degree, *dom)
    scale = max(1.0, float(np.abs(xs).max()))
    if degree > 0 and np.max(np.abs(expected - xs)) > 1e-8 * scale:
        raise ValidationError("samples are not at Chebyshev nodes")
    fn = SpectralFn1D(_coeffs_from_values(vs), dom)
    vscale = max(1.0, float(np.abs(vs).max()))
    resid = np.max(np.abs(fn(xs) - vs))
    if resid > rel_tol * vscale:
        raise ValidationError(f"interpolation residual {resid:.3e} too large")
    return fn


def _coeffs_2d(values: np.ndarray) -> np.ndarray:
    """Tensor Chebyshev coefficients from values on the first-kind node grid.

    values[k, l] = f(x_k, y_l) with nodes ordered increasing along each axis.
    """
    v = values[::-1, ::-1]
    nx, ny = v.shape
    tx = np.pi * (2.0 * np.arange(nx) + 1.0) / (2.0 * nx)
    ty = np.pi * (2.0 * np.arange(ny) + 1.0) / (2.0 * ny)
    Mx = np.cos(np.arange(nx)[:, None] * tx[None, :])
    My = np.cos(np.arange(ny)[:, None] * ty[None, :])
    C = (4.0 / (nx * ny)) * (Mx @ v @ My.T)
    C[0, :] *= 0.5
    C[:, 0] *= 0.5
    return C


@dataclass(frozen=True)
class SpectralFn2D:
    """Tensor Chebyshev series on a rectangle."""

    coeffs: np.ndarray
    rect: tuple[float, float, float, float]  # (ax, bx, ay, by)
    tail_bound: float = field(default=0.0)

    def __post_init__(self):
        ax, bx, ay, by = self.rect
        if not (bx > ax and by > ay):
            raise ValidationError(f"degenerate rectangle {self.rect}")
        C = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        object.__setattr__(self, "coeffs", C)
        nx = max(1, C.shape[0] // 10)
        ny = max(1, C.shape[1] // 10)
        tail = np.sum(np.abs(C[C.shape[0] - nx :, :])) + np.sum(
            np.abs(C[:, C.shape[1] - ny :])
        )
        object.__setattr__(self, "tail_bound", float(tail))

    @classmethod
    def from_callable(cls, fn, degree: tuple[int, int], rect):
        ax, bx, ay, by = rect
        xs = cheb_nodes(degree[0], ax, bx)
        ys = cheb_nodes(degree[1], ay, by)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return cls(_coeffs_2d(np.asarray(fn(X, Y), dtype=np.float64)), rect)

    @property
    def degree(self) -> tuple[int, int]:
        return (self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1)

    def __call__(self, x, y):
        ax, bx, ay, by = self.rect
        return cheb_eval_2d(self.coeffs, ax, bx, ay, by, x, y)

    def dx(self) -> "SpectralFn2D":
        ax, bx, ay, by = self.rect
        C = _cheb.chebder(self.coeffs, axis=0) * (2.0 / (bx - ax))
        if C.shape[0] == 0:
            C = np.zeros((1, self.coeffs.shape[1]))
        return SpectralFn2D(C, self.rect)

    def dy(self) -> "SpectralFn2D":
        ax, bx, ay, by = self.rect
        C = _cheb.chebder(self.coeffs, axis=1) * (2.0 / (by - ay))
        if C.shape[1] == 0:
            C = np.zeros((self.coeffs.shape[0], 1))
        return SpectralFn2D(C, self.rect)


def fit_2d(fn, degree: tuple[int, int], rect) -> SpectralFn2D:
    return SpectralFn2D.from_callable(fn, degree, rect)
