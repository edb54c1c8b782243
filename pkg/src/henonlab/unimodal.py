"""Unimodal maps on [0,1], period-doubling renormalization, fixed point.

The renormalization interval is the maximal one bounded by the interior
flip fixed point p (f'(p) < -1) and its preimage on the other side of
the critical point; the affine change of coordinates is the orientation
reversing bijection of [0,1] onto it, which is the one that keeps the
renormalized map unimodal.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from henonlab._kernel import std_orbit_dc
from henonlab.errors import (
    ConvergenceError,
    NotRenormalizable,
    PrecisionExhausted,
    ValidationError,
)
from henonlab.numerics import (
    DEFAULT_PRECISION,
    Precision,
    SpectralFn1D,
    cheb_nodes,
    fd_jacobian,
    newton_coeff_space,
    root_1d,
)

# Lower bound enforced for the critical-point/critical-value separation
# (space property with an unspecified uniform constant; 0.1 comfortably
# contains the fixed point, whose separation is ~0.36).
CRIT_SEPARATION_MIN = 0.1

DEFAULT_DEGREE = 40


@dataclass(frozen=True)
class AffineMap:
    """x -> offset + slope * x with exact inverse."""

    offset: float
    slope: float

    def __call__(self, t):
        return self.offset + self.slope * t

    def inv(self, x):
        return (x - self.offset) / self.slope


@dataclass(frozen=True)
class UnimodalMap:
    """Analytic unimodal map on [0,1] as a Chebyshev series plus caches."""

    f: SpectralFn1D
    critical_point: float
    interior_fixed_point: float | None
    boundary_values: tuple[float, float]

    @classmethod
    def from_spectral(cls, f: SpectralFn1D) -> "UnimodalMap":
        if tuple(f.domain) != (0.0, 1.0):
            raise ValidationError("unimodal maps live on [0, 1]")
        df = f.deriv()
        crit = _critical_point(f, df)
        fix = _expanding_fixed_point(f, df, crit)
        return cls(f, crit, fix, (float(f(0.0)), float(f(1.0))))

    @classmethod
    def from_callable(cls, fn, degree: int = DEFAULT_DEGREE) -> "UnimodalMap":
        return cls.from_spectral(
            SpectralFn1D.from_callable(fn, degree, (0.0, 1.0))
        )

    def __call__(self, x):
        return self.f(x)

    def deriv(self, x):
        return self.f.deriv()(x)

    @property
    def critical_value(self) -> float:
        return float(self.f(self.critical_point))

    def check_space(self, grid: int = 201, tol: float = 1e-9) -> list[str]:
        """Violations of the space properties; empty when f is a member."""
        bad = []
        df = self.f.deriv()
        c = self.critical_point
        xs_l = np.linspace(1e-4, c - 1e-4, grid)
        xs_r = np.linspace(c + 1e-4, 1.0 - 1e-4, grid)
        if np.any(df(xs_l) <= 0):
            bad.append("not orientation-preserving left of the critical point")
        if np.any(df(xs_r) >= 0):
            bad.append("not orientation-reversing right of the critical point")
        b0, b1 = self.boundary_values
        if not (-tol <= b0 <= 1 + tol and -tol <= b1 <= 1 + tol):
            bad.append(f"boundary values {b0:.4f}, {b1:.4f} escape [0,1]")
        if self.interior_fixed_point is None:
            bad.append("no expanding interior fixed point")
        else:
            if abs(df(self.interior_fixed_point)) <= 1.0:
                bad.append("interior fixed point not expanding")
        if abs(self.critical_value - c) < CRIT_SEPARATION_MIN:
            bad.append("critical point too close to critical value")
        return bad

    def require_space(self):
        bad = self.check_space()
        if bad:
            raise ValidationError("; ".join(bad))


def _critical_point(f: SpectralFn1D, df: SpectralFn1D) -> float:
    xs = np.linspace(0.0, 1.0, 257)
    vals = df(xs)
    # maximum-type crossing: derivative passes from + to -, possibly
    # through an exact grid zero (even maps have df(1/2) == 0.0)
    for k in range(len(xs) - 1):
        if vals[k] > 0.0 > vals[k + 1]:
            return root_1d(df, (xs[k], xs[k + 1]), Precision(abs_tol=1e-13))
        if (
            vals[k + 1] == 0.0
            and k + 2 < len(xs)
            and vals[k] > 0.0 > vals[k + 2]
        ):
            return float(xs[k + 1])
    raise ValidationError("no critical point in (0,1)")


def _expanding_fixed_point(f, df, crit) -> float | None:
    """The expanding interior fixed point, preferring the flip one."""
    xs = np.linspace(1e-6, 1.0 - 1e-6, 513)
    g = f(xs) - xs
    roots = []
    for k in range(len(xs) - 1):
        if g[k] == 0.0:
            roots.append(float(xs[k]))
        elif g[k] * g[k + 1] < 0.0:
            try:
                roots.append(
                    root_1d(lambda x: float(f(x)) - x, (xs[k], xs[k + 1]),
                            Precision(abs_tol=1e-13))
                )
            except ConvergenceError:
                continue
    expanding = [r for r in roots if abs(df(r)) > 1.0]
    if not expanding:
        return None
    flips = [r for r in expanding if df(r) < -1.0]
    pool = flips or expanding
    return float(min(pool, key=lambda r: abs(r - crit) if crit else r))


@dataclass(frozen=True)
class RenormData1D:
    """Renormalization interval data for one period-doubling step."""

    J0: tuple[float, float]
    J1: tuple[float, float]
    h: AffineMap
    orientation_choice: str  # "reversing" in the period-doubling convention

    @property
    def length(self) -> float:
        return self.J0[1] - self.J0[0]


def check_renormalizable(
    f: UnimodalMap, prec: Precision = DEFAULT_PRECISION, grid: int = 129
) -> RenormData1D:
    """Renormalization data for f, or NotRenormalizable.

    The interval is J0 = [p_hat, p] with p the interior flip fixed point
    and p_hat its preimage across the critical point; J1 = f(J0) shares
    only the endpoint p with J0, and f^2(J0) subset J0 is verified on a
    sample grid.
    """
    df = f.f.deriv()
    p = f.interior_fixed_point
    if p is None or df(p) >= -1.0:
        raise NotRenormalizable("no interior flip fixed point with f' < -1")
    c = f.critical_point
    if p <= c:
        raise NotRenormalizable("flip fixed point left of the critical point")
    # preimage of p on the increasing branch
    f0 = float(f(0.0))
    if f0 > p:
        raise NotRenormalizable("no preimage of p left of the critical point")
    p_hat = root_1d(lambda x: float(f(x)) - p, (0.0, c), prec)
    fc = f.critical_value
    if fc > 1.0 + 1e-12:
        raise NotRenormalizable("critical value escapes [0,1]")
    J0 = (p_hat, p)
    J1 = (p, fc)
    ts = cheb_nodes(grid - 1, *J0)
    f2 = f(f(ts))
    pad = 1e-10 * max(1.0, abs(p))
    if np.any(f2 < J0[0] - pad) or np.any(f2 > J0[1] + pad):
        raise NotRenormalizable("f^2(J0) not contained in J0")
    h = AffineMap(offset=p, slope=p_hat - p)  # h(0)=p, h(1)=p_hat
    return RenormData1D(J0, J1, h, "reversing")


def renormalize_unimodal(
    f: UnimodalMap,
    prec: Precision = DEFAULT_PRECISION,
    degree: int | None = None,
    data: RenormData1D | None = None,
) -> UnimodalMap:
    """One period-doubling renormalization h^{-1} o f^2 o h, refit."""
    if data is None:
        data = check_renormalizable(f, prec)
    deg = degree if degree is not None else f.f.degree
    h = data.h
    ts = cheb_nodes(deg, 0.0, 1.0)
    vals = h.inv(f(f(h(ts))))
    rf = UnimodalMap.from_spectral(SpectralFn1D.from_values(vals, (0.0, 1.0)))
    bad = rf.check_space()
    if bad:
        raise NotRenormalizable(
            "renormalized map left the unimodal space: " + "; ".join(bad)
        )
    return rf


# ---------------------------------------------------------------------------
# the fixed point


def _even_to_full(v: np.ndarray) -> np.ndarray:
    full = np.zeros(2 * len(v) - 1)
    full[::2] = v
    return full


def _full_to_even(c: np.ndarray, n_even: int) -> np.ndarray:
    out = np.zeros(n_even)
    have = c[::2]
    out[: min(len(have), n_even)] = have[:n_even]
    return out


def _map_from_even(v: np.ndarray) -> UnimodalMap:
    return UnimodalMap.from_spectral(
        SpectralFn1D(_even_to_full(v), (0.0, 1.0))
    )


def solve_fixed_point(
    seed: UnimodalMap | None = None,
    prec: Precision = Precision(abs_tol=1e-12),
    degree: int = DEFAULT_DEGREE,
    cache_dir: str | os.PathLike | None = None,
) -> UnimodalMap:
    """The renormalization fixed point by Newton on even coefficients.

    The fixed point is even about its critical point 1/2 (forced by the
    interval convention), so the solve runs on the even-index Chebyshev
    coefficients only.  Results are cached as JSON keyed by (degree,
    abs_tol).
    """
    cache = _cache_path(degree, prec, cache_dir)
    if cache is not None and cache.exists():
        data = json.loads(cache.read_text())
        return UnimodalMap.from_spectral(
            SpectralFn1D(np.array(data["coeffs"]), (0.0, 1.0))
        )

    if seed is None:
        seed = default_seed(degree)
    n_even = degree // 2 + 1
    v0 = _full_to_even(seed.f.coeffs, n_even)

    def residual(v):
        rf = renormalize_unimodal(_map_from_even(v), prec, degree=degree)
        return _full_to_even(rf.f.coeffs, n_even) - v

    res = newton_coeff_space(residual, v0, prec, max_iter=30)
    fstar = _map_from_even(res.x)
    # contract check in sup norm on [0,1]
    xs = np.linspace(0, 1, 401)
    rf = renormalize_unimodal(fstar, prec, degree=degree)
    sup = float(np.max(np.abs(rf(xs) - fstar(xs))))
    if sup > 10 * prec.abs_tol:
        raise ConvergenceError(f"fixed point sup-norm residual {sup:.2e}")
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        tmp = cache.with_suffix(".tmp")
        tmp.write_text(
            json.dumps(
                {
                    "degree": degree,
                    "abs_tol": prec.abs_tol,
                    "coeffs": fstar.f.coeffs.tolist(),
                    "sup_residual": sup,
                }
            )
        )
        tmp.replace(cache)
    return fstar


def _cache_path(degree, prec, cache_dir) -> Path | None:
    base = cache_dir or os.environ.get("HENONLAB_CACHE")
    if base is None:
        base = Path.home() / ".cache" / "henonlab"
    base = Path(base)
    return base / f"fixed_point_deg{degree}_tol{prec.abs_tol:.0e}.json"


def default_seed(degree: int = DEFAULT_DEGREE, pre_iterates: int = 8) -> UnimodalMap:
    """R^k of the logistic map at the accumulation parameter."""
    cstar = feigenbaum_parameter()
    f = logistic(cstar, degree)
    for _ in range(pre_iterates):
        f = renormalize_unimodal(f, degree=degree)
    return f


def linearization_spectrum(
    f_star: UnimodalMap, prec: Precision = DEFAULT_PRECISION
) -> np.ndarray:
    """Eigenvalues of the finite-difference linearization of R at f_star.

    Restricted to the even-coefficient subspace; sorted by decreasing
    magnitude.  Exactly one eigenvalue should exceed 1 in magnitude (the
    expanding direction, ~ 4.669).
    """
    degree = f_star.f.degree
    n_even = degree // 2 + 1
    v0 = _full_to_even(f_star.f.coeffs, n_even)

    def rmap(v):
        rf = renormalize_unimodal(_map_from_even(v), prec, degree=degree)
        return _full_to_even(rf.f.coeffs, n_even)

    J = fd_jacobian(rmap, v0, step=1e-7)
    w = np.linalg.eigvals(J)
    return w[np.argsort(-np.abs(w))]


# ---------------------------------------------------------------------------
# scaling ratio and the doubling cascade of the logistic family


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    error: float
    sequence: tuple[float, ...]


def scaling_ratio(
    f_star: UnimodalMap, depth: int, prec: Precision = DEFAULT_PRECISION
) -> EstimateWithError:
    """Period-doubling scaling ratio from nested interval lengths.

    The ratio |J0(R^{n+1} f)| / |J0(R^n f)| in ambient coordinates equals
    the unit-interval length of J0 of the n-th renormalized map; the
    sequence is reported with its final Cauchy difference as the error.
    """
    seq = []
    f = f_star
    for n in range(depth + 1):
        try:
            data = check_renormalizable(f, prec)
            seq.append(data.length)
            if n < depth:
                f = renormalize_unimodal(f, prec)
        except NotRenormalizable as exc:
            raise PrecisionExhausted(
                f"renormalization broke down at depth {n}: {exc}", max_level=n
            ) from exc
    err = abs(seq[-1] - seq[-2]) if len(seq) > 1 else np.inf
    return EstimateWithError(float(seq[-1]), float(err), tuple(seq))


def logistic(c: float, degree: int = DEFAULT_DEGREE) -> UnimodalMap:
    return UnimodalMap.from_callable(lambda x: c * x * (1.0 - x), degree)


def superstable_parameter(k: int, seed: float, prec_tol: float = 1e-13) -> float:
    """Parameter where the logistic critical orbit is 2^k-periodic.

    Newton on c -> f_c^{2^k}(1/2) - 1/2 using the orbit derivative.
    """
    n = 1 << k
    c = float(seed)
    best = (np.inf, c)
    for _ in range(60):
        x, _, dx, _ = std_orbit_dc(c, 0.0, 0.5, 0.5, n)
        g = x - 0.5
        if abs(g) < best[0]:
            best = (abs(g), c)
        if abs(g) < prec_tol:
            return c
        if dx == 0.0 or not np.isfinite(dx):
            raise ConvergenceError(f"superstable Newton stalled at k={k}")
        step = g / dx
        if abs(step) > 0.25:
            step = np.sign(step) * 0.25
        # deep iterates evaluate with ~1e-12 noise; once the parameter
        # step is below float resolution the best iterate is the answer
        if abs(step) < 8e-15 * abs(c):
            return best[1]
        c -= step
    if best[0] < 1e-9:
        return best[1]
    raise ConvergenceError(f"superstable Newton did not converge at k={k}")


def superstable_ladder(kmax: int) -> list[float]:
    """Superstable parameters s_0 .. s_kmax of the logistic family."""
    s = [2.0, 1.0 + np.sqrt(5.0)]
    if kmax == 0:
        return s[:1]
    for k in range(2, kmax + 1):
        guess = s[-1] + (s[-1] - s[-2]) / 4.669201
        s.append(superstable_parameter(k, guess))
    return s[: kmax + 1]


def feigenbaum_parameter(kmax: int = 14) -> float:
    """Accumulation parameter of the logistic cascade, via extrapolation."""
    s = superstable_ladder(kmax)
    # geometric-tail extrapolation with the measured ratio
    d1, d0 = s[-1] - s[-2], s[-2] - s[-3]
    ratio = d1 / d0
    return s[-1] + d1 * ratio / (1.0 - ratio)


def feigenbaum_delta(
    family_superstable=None, kmax: int = 12
) -> EstimateWithError:
    """delta from ratios of successive superstable-parameter gaps.

    ``family_superstable`` maps k to the superstable parameter; defaults
    to the logistic family ladder.  Aitken-accelerated, with the last
    Cauchy difference of the accelerated sequence as the error bar.
    """
    if family_superstable is None:
        s = superstable_ladder(kmax)
    else:
        s = [family_superstable(k) for k in range(kmax + 1)]
    gaps = np.diff(s)
    if np.any(gaps == 0):
        raise ConvergenceError("cascade not found: zero superstable gap")
    ratios = gaps[:-1] / gaps[1:]
    # Aitken acceleration of the ratio sequence
    acc = []
    for i in range(len(ratios) - 2):
        d2 = ratios[i + 2] - 2 * ratios[i + 1] + ratios[i]
        if d2 != 0:
            acc.append(ratios[i + 2] - (ratios[i + 2] - ratios[i + 1]) ** 2 / d2)
    seq = acc if len(acc) >= 2 else list(ratios)
    err = abs(seq[-1] - seq[-2])
    return EstimateWithError(float(seq[-1]), float(err), tuple(ratios))
