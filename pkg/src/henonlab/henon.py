"""Henon-like maps F(x,y) = (f(x) - eps(x,y), x) and the standard family.

eps is stored structurally as y * eta(x, y), so eps(x, 0) = 0 holds by
construction rather than numerically.  eta is fit on a y-padded
rectangle because inversion and curve work make small excursions
outside the unit square.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from henonlab._kernel import (
    henon_eval_many,
    henon_orbit_logjac,
    std_orbit_jac,
    std_orbit_points,
)
from henonlab.errors import (
    ConvergenceError,
    DegenerateMap,
    HenonLabError,
    PrecisionExhausted,
    ValidationError,
)
from henonlab.numerics import (
    DEFAULT_PRECISION,
    Precision,
    SpectralFn1D,
    SpectralFn2D,
    root_1d,
)
from henonlab.unimodal import UnimodalMap, logistic

ETA_RECT = (0.0, 1.0, -0.35, 1.35)  # y-padded fit rectangle for eta
ETA_DEGREE = (16, 12)


@dataclass(frozen=True)
class HenonLikeMap:
    """Pair (f, eps) with F(x, y) = (f(x) - eps(x, y), x), eps = y eta."""

    f: UnimodalMap
    eta: SpectralFn2D | None  # None encodes the degenerate map eps == 0
    thickness: float = 0.0

    def __post_init__(self):
        if self.eta is not None and self.thickness == 0.0:
            object.__setattr__(self, "thickness", self._measure_thickness())

    def _measure_thickness(self) -> float:
        xs = np.linspace(0.0, 1.0, 41)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        return float(np.abs(Y * self.eta(X, Y)).max())

    @property
    def is_degenerate(self) -> bool:
        return self.eta is None

    @cached_property
    def _eta_dx(self) -> SpectralFn2D | None:
        return None if self.eta is None else self.eta.dx()

    @cached_property
    def _eta_dy(self) -> SpectralFn2D | None:
        return None if self.eta is None else self.eta.dy()

    @cached_property
    def _df(self) -> SpectralFn1D:
        return self.f.f.deriv()

    # -- evaluation ---------------------------------------------------------

    def eps(self, x, y):
        if self.eta is None:
            return np.zeros_like(np.asarray(x, dtype=np.float64)) if np.ndim(x) else 0.0
        return np.asarray(y) * self.eta(x, y) if np.ndim(x) else y * self.eta(x, y)

    def eval(self, p):
        x, y = float(p[0]), float(p[1])
        return np.array([float(self.f(x)) - self.eps(x, y), x])

    def __call__(self, p):
        return self.eval(p)

    def eval_many(self, P):
        P = np.asarray(P, dtype=np.float64)
        if self.eta is None:
            X, Y = henon_eval_many(
                self.f.f.coeffs, 0.0, 1.0, None, 0, 0, 0, 0, P[:, 0], P[:, 1]
            )
        else:
            X, Y = henon_eval_many(
                self.f.f.coeffs, 0.0, 1.0, self.eta.coeffs, *self.eta.rect,
                P[:, 0], P[:, 1],
            )
        return np.column_stack([X, Y])

    def orbit(self, p, n: int) -> np.ndarray:
        """Orbit points z, F(z), ..., F^n(z) as an (n+1, 2) array."""
        out = np.empty((n + 1, 2))
        out[0] = p
        z = np.asarray(p, dtype=np.float64)[None, :]
        for i in range(1, n + 1):
            z = self.eval_many(z)
            out[i] = z[0]
            if not np.all(np.isfinite(z)) or np.abs(z).max() > 10.0:
                raise HenonLabError(f"orbit escaped at step {i}")
        return out

    # -- derivatives --------------------------------------------------------

    def jacobian(self, P) -> np.ndarray:
        """DF at each point, shape (n, 2, 2); analytic from the series."""
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        X, Y = P[:, 0], P[:, 1]
        n = len(P)
        J = np.zeros((n, 2, 2))
        J[:, 0, 0] = self._df(X)
        J[:, 1, 0] = 1.0
        if self.eta is not None:
            J[:, 0, 0] -= Y * self._eta_dx(X, Y)
            J[:, 0, 1] = -(self.eta(X, Y) + Y * self._eta_dy(X, Y))
        return J

    def jac_det(self, x, y):
        """det DF = d_y eps; for the standard family this is b everywhere."""
        if self.eta is None:
            return np.zeros_like(np.asarray(x, dtype=np.float64)) if np.ndim(x) else 0.0
        return self.eta(x, y) + np.asarray(y) * self._eta_dy(x, y)

    # -- inversion ----------------------------------------------------------

    def invert(self, q, prec: Precision = DEFAULT_PRECISION):
        """The preimage of q: x = q_y, then solve for y.

        Raises DegenerateMap when eps == 0 and ConvergenceError when q is
        outside the image (no admissible y).
        """
        if self.eta is None:
            raise DegenerateMap("degenerate map is not invertible")
        qx, qy = float(q[0]), float(q[1])
        ylo, yhi = self.eta.rect[2], self.eta.rect[3]

        def g(y):
            return float(self.f(qy)) - qy_eps(y) - qx

        def qy_eps(y):
            return y * float(self.eta(qy, y))

        glo, ghi = g(ylo), g(yhi)
        if glo * ghi > 0:
            raise ConvergenceError(
                f"invert: no solution for q=({qx:.4f},{qy:.4f}) in y-range "
                f"[{ylo},{yhi}] (point outside image)"
            )
        y = root_1d(g, (ylo, yhi), prec)
        # reject non-monotone eps wells (multiple preimages)
        d = self.jac_det(qy, y)
        if abs(d) < 1e-14:
            raise DegenerateMap("d_y eps vanishes at the preimage")
        return np.array([qy, y])

    def invert_many(self, Q, prec: Precision = DEFAULT_PRECISION):
        return np.array([self.invert(q, prec) for q in np.atleast_2d(Q)])


def eval_map(F: HenonLikeMap, p):
    return F.eval(p)


def invert(F: HenonLikeMap, q, prec: Precision = DEFAULT_PRECISION):
    return F.invert(q, prec)


def jacobian_det(F: HenonLikeMap, p):
    return float(F.jac_det(float(p[0]), float(p[1])))


def validate_henon(F: HenonLikeMap, grid: int = 21, tol: float = 1e-12) -> list[str]:
    """Sampled structural checks; empty list when all hold."""
    bad = []
    xs = np.linspace(0.0, 1.0, grid)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    img = F.eval_many(P)
    if np.abs(img[:, 1] - P[:, 0]).max() > 0.0:
        bad.append("second coordinate is not exactly x")
    if not F.is_degenerate:
        if np.abs(F.eps(xs, np.zeros_like(xs))).max() > tol:
            bad.append("eps(x, 0) != 0")
        sup = np.abs(F.eps(X, Y)).max()
        if sup > F.thickness * (1 + 1e-9) + tol:
            bad.append(f"sup|eps| = {sup:.3e} exceeds stored thickness")
        dets = F.jac_det(X, Y)
        if np.any(dets <= 0):
            bad.append("Jacobian determinant vanishes or changes sign")
    return bad


# ---------------------------------------------------------------------------
# the standard constant-Jacobian test family


@dataclass(frozen=True)
class StandardFamily:
    """F(x, y) = (c x (1 - x) - b y, x); Jacobian determinant == b."""

    c: float
    b: float

    def map(self, degree: int = 40) -> HenonLikeMap:
        f = logistic(self.c, degree)
        if self.b == 0.0:
            return HenonLikeMap(f, None)
        eta = SpectralFn2D(np.array([[self.b]]), ETA_RECT)
        return HenonLikeMap(f, eta, thickness=self.b * ETA_RECT[3])

    def orbit(self, p, n: int) -> np.ndarray:
        return std_orbit_points(self.c, self.b, float(p[0]), float(p[1]), n)

    def with_c(self, c: float) -> "StandardFamily":
        return StandardFamily(c, self.b)


def standard_map(c: float, b: float, degree: int = 40) -> HenonLikeMap:
    return StandardFamily(c, b).map(degree)


# ---------------------------------------------------------------------------
# average Jacobian


def average_jacobian(
    F: HenonLikeMap, tip, depth: int, prec: Precision = DEFAULT_PRECISION
) -> float:
    """exp of the orbit average of log|Jac F| over 2^depth tip iterates.

    The tip orbit equidistributes for the unique invariant measure on the
    renormalization Cantor set, so this is the Birkhoff average defining
    the average Jacobian.  Degenerate maps return 0 by convention.
    """
    if F.is_degenerate:
        return 0.0
    n = 1 << depth
    x, y = float(tip[0]), float(tip[1])
    xe, ye, logsum = henon_orbit_logjac(
        F.f.f.coeffs, 0.0, 1.0, F.eta.coeffs, F._eta_dy.coeffs, *F.eta.rect,
        x, y, n,
    )
    if not (np.isfinite(xe) and -2.0 < xe < 3.0):
        raise HenonLabError("tip orbit escaped [0,1]^2: map is not tuned")
    if logsum == -np.inf:
        return 0.0
    return float(np.exp(logsum / n))


# ---------------------------------------------------------------------------
# tuning to infinite renormalizability


@dataclass(frozen=True)
class TuneResult:
    """Accumulation-parameter estimate for a fixed b, with its ladder."""

    c: float
    b: float
    depth: int
    flip_ladder: tuple[float, ...]  # t_k: flip bifurcation of the 2^(k-1) orbit
    delta_estimate: float

    def bracket(self, depth: int | None = None) -> tuple[float, float]:
        """Interval around c inside the depth-renormalizable window."""
        d = self.depth if depth is None else depth
        if d + 1 < len(self.flip_ladder):
            lo = self.flip_ladder[d + 1]
        else:
            lo = self.flip_ladder[-1]
        return (lo, self.c + (self.c - lo))


def _flip_condition(c: float, b: float, z, period: int):
    """Residual (orbit closure, eigenvalue + 1) for the extended system."""
    x, y, m11, m12, m21, m22 = std_orbit_jac(c, b, z[0], z[1], period)
    # det(M + I) = 0 iff -1 is an eigenvalue of the orbit derivative
    detp1 = (m11 + 1.0) * (m22 + 1.0) - m12 * m21
    return np.array([x - z[0], y - z[1], detp1])


def _settle_orbit_point(c: float, b: float, period: int) -> np.ndarray:
    settle = 4000 + 8 * period
    pts = std_orbit_points(c, b, 0.5, 0.5, settle)
    if not np.all(np.isfinite(pts[-1])):
        raise ConvergenceError("orbit escaped while settling")
    return pts[-1]


def flip_point(
    b: float, k: int, c_seed: float, z_seed=None, tol: float = 5e-14
) -> tuple[float, np.ndarray]:
    """Parameter t_k where the period-2^(k-1) orbit has eigenvalue -1."""
    period = 1 << (k - 1)
    if z_seed is None:
        # settle slightly below the flip where the orbit is attracting
        z_seed = _settle_orbit_point(c_seed - 0.2 * 4.669 ** (1 - k), b, period)
    u = np.array([z_seed[0], z_seed[1], c_seed])
    best = (np.inf, u)
    for _ in range(60):
        r = _flip_condition(u[2], b, u[:2], period)
        nrm = float(np.abs(r).max())
        if nrm < best[0]:
            best = (nrm, u.copy())
        if nrm < tol:
            return float(u[2]), u[:2].copy()
        J = np.empty((3, 3))
        hz = 1e-8
        for j in range(3):
            up = u.copy()
            up[j] += hz
            J[:, j] = (_flip_condition(up[2], b, up[:2], period) - r) / hz
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"flip_point singular at k={k}") from exc
        if np.abs(step).max() < 1e-14 * max(1.0, abs(u[2])):
            return float(u[2]), u[:2].copy()
        u = u - step
    if best[0] < 1e-9:
        return float(best[1][2]), best[1][:2].copy()
    raise ConvergenceError(f"flip_point Newton failed at k={k} (res {best[0]:.1e})")


def flip_ladder(b: float, kmax: int) -> list[float]:
    """Flip bifurcation parameters t_1 .. t_kmax at fixed b.

    t_1 = 3(1 + b) exactly for the standard family; the rest continue
    with delta-extrapolated seeds.
    """
    ts = [3.0 * (1.0 + b)]
    if kmax == 1:
        return ts
    t2, _ = flip_point(b, 2, ts[0] + 0.45)
    ts.append(t2)
    for k in range(3, kmax + 1):
        gap = ts[-1] - ts[-2]
        seed = ts[-1] + gap / 4.669201
        t, _ = flip_point(b, k, seed)
        if not (ts[-1] < t < ts[-1] + gap):
            raise ConvergenceError(f"flip ladder left the cascade at k={k}")
        ts.append(t)
    return ts


def tune_parameter(
    b: float,
    depth: int,
    kmax: int | None = None,
    prec: Precision = DEFAULT_PRECISION,
) -> TuneResult:
    """Accumulation-of-doubling parameter c*(b) of the standard family.

    Newton flip-point ladder plus geometric-tail extrapolation; the
    result is renormalizable well past ``depth`` for desk-scale depths.
    """
    if depth > 16:
        raise PrecisionExhausted(
            "flip gaps fall below float64 resolution past depth 16",
            max_level=16,
        )
    k_top = max(depth + 2, 8)
    if kmax is not None:
        k_top = max(k_top, kmax)
    k_top = min(k_top, 15)
    ts = flip_ladder(b, k_top)
    d1, d0 = ts[-1] - ts[-2], ts[-2] - ts[-3]
    ratio = d1 / d0
    if not 0.0 < ratio < 1.0:
        raise ConvergenceError("flip gaps are not contracting")
    c = ts[-1] + d1 * ratio / (1.0 - ratio)
    delta = 1.0 / ratio
    return TuneResult(float(c), b, depth, tuple(ts), float(delta))


def attracting_power2_depth(c: float, b: float, dmax: int = 12) -> int:
    """Depth of the attracting 2^d cycle at (c, b); oracle-style check."""
    from henonlab._kernel import std_power2_period

    d = std_power2_period(c, b, 0.5, 0.5, 20000, dmax, 1e-7)
    return int(d)


# ---------------------------------------------------------------------------
# family config


def family_from_config(cfg: dict) -> HenonLikeMap:
    """Build a map from a JSON-style config dict.

    {"family": "standard", "c": 3.56, "b": 0.1}  or explicit arrays:
    {"family": "spectral", "f_coeffs": [...], "eta_coeffs": [[...]],
     "eta_rect": [0,1,-0.35,1.35]}
    """
    kind = cfg.get("family", "standard")
    if kind == "standard":
        if "c" not in cfg:
            tr = tune_parameter(float(cfg["b"]), int(cfg.get("depth", 8)))
            c = tr.c
        else:
            c = float(cfg["c"])
        return standard_map(c, float(cfg["b"]), int(cfg.get("degree", 40)))
    if kind == "spectral":
        f = UnimodalMap.from_spectral(
            SpectralFn1D(np.asarray(cfg["f_coeffs"], dtype=float), (0.0, 1.0))
        )
        eta_c = cfg.get("eta_coeffs")
        if eta_c is None:
            return HenonLikeMap(f, None)
        rect = tuple(cfg.get("eta_rect", ETA_RECT))
        return HenonLikeMap(f, SpectralFn2D(np.asarray(eta_c, dtype=float), rect))
    raise ValidationError(f"unknown family kind {kind!r}")


def load_family(path) -> HenonLikeMap:
    with open(path) as fh:
        return family_from_config(json.load(fh))
