"""The Henon renormalization operator, scope maps, towers, and the
asymptotic-form diagnostics.

Realization: straighten with the horizontal diffeomorphism
H(x, y) = (f(x) - eps(x, y), y), so that the pre-renormalization
G = H o F^2 o H^{-1} is again of Henon-like form (G(u, v), u); then
rescale both coordinates with the affine bijection of [0,1] onto
[x1_hat, x1], where x1 is the flip-saddle coordinate (the saddle lies on
the diagonal) and x1_hat is the nearest preimage of x1 under
u -> G(u, x1) to its left.  On degenerate maps this reduces exactly to
the unimodal operator, which is asserted by tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from henonlab.errors import (
    ConvergenceError,
    NotRenormalizable,
    PrecisionExhausted,
    ValidationError,
)
from henonlab.henon import ETA_DEGREE, ETA_RECT, HenonLikeMap
from henonlab.numerics import (
    DEFAULT_PRECISION,
    Precision,
    SpectralFn1D,
    SpectralFn2D,
    cheb_nodes,
    root_1d,
)
from henonlab.unimodal import (
    AffineMap,
    UnimodalMap,
    renormalize_unimodal,
)

# below this thickness the next level's thickening (~ thickness^2) is
# float64 noise; the refit drops it and the tower continues degenerate
DEGENERATE_COLLAPSE = 2e-7


def flip_saddle_x(F: HenonLikeMap, prec: Precision = DEFAULT_PRECISION) -> float:
    """Diagonal coordinate x1 of the interior flip saddle p1 = (x1, x1)."""

    def g(x):
        return float(F.f(x)) - F.eps(x, x) - x

    p_guess = F.f.interior_fixed_point
    if p_guess is None:
        raise NotRenormalizable("unimodal factor has no expanding fixed point")
    lo, hi = max(0.05, p_guess - 0.2), min(0.98, p_guess + 0.2)
    x1 = root_1d(g, (lo, hi), prec)
    J = F.jacobian(np.array([[x1, x1]]))[0]
    tr, det = J[0, 0] + J[1, 1], J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0:
        raise NotRenormalizable("flip saddle has complex eigenvalues")
    lam_u = 0.5 * (tr - np.sqrt(disc))  # the flip branch is the negative one
    if lam_u >= -1.0:
        raise NotRenormalizable(f"interior fixed point is not a flip saddle "
                                f"(lambda={lam_u:.4f})")
    return x1


def _x_root(F: HenonLikeMap, u: float, v: float, bracket, prec) -> float:
    """Right-branch solution X of f(X) - eps(X, v) = u."""

    def g(x):
        return float(F.f(x)) - F.eps(x, v) - u

    return root_1d(g, bracket, prec)


@dataclass(frozen=True)
class ScopeMap:
    """Psi = H^{-1} o Lambda^{-1} for one renormalization step of F.

    Maps the unit square of the renormalized map into the renormalization
    box of F; the extension to the vertical strip [0,1] x h^{-1}([0,1])
    uses the same formula (the y-argument only passes through h).
    """

    F: HenonLikeMap
    h: AffineMap
    x1: float
    x_bracket: tuple[float, float]
    word_letter: int = 0
    prec: Precision = field(default=DEFAULT_PRECISION, repr=False)

    @property
    def strip_domain(self) -> tuple[float, float]:
        """y-range of the extended domain A = [0,1] x I."""
        a, b = sorted((self.h.inv(0.0), self.h.inv(1.0)))
        return (float(a), float(b))

    def forward(self, P) -> np.ndarray:
        """Apply Psi to points of the (extended) unit square."""
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        U = self.h(P[:, 0])
        V = self.h(P[:, 1])
        out = np.empty_like(P)
        out[:, 1] = V
        F = self.F
        df = F.f.f.deriv()
        lo, hi = self.x_bracket
        # vectorized Newton on f(X) - eps(X, V) = U with bracket fallback
        X = np.full(len(P), 0.5 * (lo + hi))
        ok = np.zeros(len(P), dtype=bool)
        for _ in range(60):
            g = F.f(X) - _eps_arr(F, X, V) - U
            d = df(X) - _depsdx_arr(F, X, V)
            step = g / np.where(d == 0.0, 1.0, d)
            X = np.clip(X - step, lo, hi)
            ok = np.abs(g) < self.prec.abs_tol
            if ok.all():
                break
        if not ok.all():
            for i in np.flatnonzero(~ok):
                X[i] = _x_root(F, U[i], V[i], (lo, hi), self.prec)
        out[:, 0] = X
        if self.word_letter == 1:
            out = F.eval_many(out)
        return out

    def __call__(self, P):
        return self.forward(P)

    def jacobian_fd(self, P, step: float = 1e-7) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        J = np.empty((len(P), 2, 2))
        for k in range(2):
            dp = np.zeros(2)
            dp[k] = step
            J[:, :, k] = (self.forward(P + dp) - self.forward(P - dp)) / (2 * step)
        return J

    def with_letter(self, letter: int) -> "ScopeMap":
        return ScopeMap(self.F, self.h, self.x1, self.x_bracket, letter, self.prec)


def _eps_arr(F: HenonLikeMap, X, V):
    if F.eta is None:
        return np.zeros_like(X)
    return V * F.eta(X, V)


def _depsdx_arr(F: HenonLikeMap, X, V):
    if F.eta is None:
        return np.zeros_like(X)
    return V * F._eta_dx(X, V)


def _pre_renorm_x(F: HenonLikeMap, u, v, bracket, prec) -> float:
    """G(u, v): the x-part of H o F^2 o H^{-1}."""
    X = _x_root(F, u, v, bracket, prec)
    a = float(F.f(u)) - F.eps(u, X)
    return float(F.f(a)) - F.eps(a, u)


def renormalize_henon(
    F: HenonLikeMap,
    prec: Precision = DEFAULT_PRECISION,
    degree_f: int | None = None,
    degree_eta: tuple[int, int] = ETA_DEGREE,
) -> tuple[HenonLikeMap, ScopeMap]:
    """One period-doubling renormalization of a Henon-like map.

    Returns (R F, Psi) with R F = Psi^{-1} o F^2 o Psi.  Degenerate maps
    go through the unimodal operator, with Psi built from f alone (this is
    the operator-extension property).
    """
    deg_f = degree_f if degree_f is not None else F.f.f.degree

    if F.is_degenerate:
        rf = renormalize_unimodal(F.f, prec, degree=deg_f)
        x1 = F.f.interior_fixed_point
        h = AffineMap(offset=x1, slope=_degenerate_xhat(F.f, prec) - x1)
        scope = ScopeMap(F, h, x1, _right_bracket(F, prec), 0, prec)
        return HenonLikeMap(rf, None), scope

    x1 = flip_saddle_x(F, prec)
    bracket = _right_bracket(F, prec)

    def G(u, v):
        return _pre_renorm_x(F, u, v, bracket, prec)

    x1_hat = _nearest_left_preimage(lambda u: G(u, x1), x1, prec)
    h = AffineMap(offset=x1, slope=x1_hat - x1)
    scope = ScopeMap(F, h, x1, bracket, 0, prec)

    # new unimodal factor: the v = h(0) = x1 section, rescaled
    ts = cheb_nodes(deg_f, 0.0, 1.0)
    g0 = np.array([G(h(t), x1) for t in ts])
    f_vals = h.inv(g0)
    f_new = SpectralFn1D.from_values(f_vals, (0.0, 1.0))
    try:
        fu_new = UnimodalMap.from_spectral(f_new)
    except ValidationError as exc:
        raise NotRenormalizable(f"renormalized factor invalid: {exc}") from exc
    bad = fu_new.check_space()
    if bad:
        raise NotRenormalizable(
            "renormalized map left the space: " + "; ".join(bad)
        )

    if F.thickness < DEGENERATE_COLLAPSE:
        # next thickening ~ thickness^2 is below refit noise
        return HenonLikeMap(fu_new, None), scope

    # new thickening eta(t, s) = [G(h t, x1) - G(h t, h s)] / (h' s)
    nx, ny = degree_eta
    txs = cheb_nodes(nx, 0.0, 1.0)
    sys_ = cheb_nodes(ny, ETA_RECT[2], ETA_RECT[3])
    vals = np.empty((nx + 1, ny + 1))
    for i, t in enumerate(txs):
        u = h(t)
        base = G(u, x1)
        for j, s in enumerate(sys_):
            if abs(s) < 1e-9:
                vals[i, j] = 0.0  # structural zero at y = 0
            else:
                vals[i, j] = (base - G(u, h(s))) / (h.slope * s)
    from henonlab.numerics.spectral import _coeffs_2d

    eta_new = SpectralFn2D(_coeffs_2d(vals), ETA_RECT)
    scale = max(np.abs(vals).max(), 1e-300)
    if eta_new.tail_bound > 0.05 * scale + 1e-11:
        raise NotRenormalizable(
            f"refit tail {eta_new.tail_bound:.2e} exceeds tolerance "
            f"(thickening not resolved at degree {degree_eta})"
        )
    RF = HenonLikeMap(fu_new, eta_new)
    if RF.thickness < 1e-13:
        RF = HenonLikeMap(fu_new, None)
    return RF, scope


def _right_bracket(F: HenonLikeMap, prec) -> tuple[float, float]:
    """x-bracket for the decreasing branch of x -> f(x) - eps(x, v)."""
    return (F.f.critical_point + 1e-6, 1.0)


def _degenerate_xhat(f: UnimodalMap, prec) -> float:
    from henonlab.unimodal import check_renormalizable

    return check_renormalizable(f, prec).J0[0]


def _nearest_left_preimage(g, x1: float, prec, n_grid: int = 160) -> float:
    """Largest root of g(u) = x1 strictly left of x1."""
    us = np.linspace(0.03, x1 - 1e-4, n_grid)
    vals = np.array([g(u) for u in us]) - x1
    for k in range(len(us) - 2, -1, -1):
        if vals[k] == 0.0:
            return float(us[k])
        if vals[k] * vals[k + 1] < 0.0:
            return root_1d(lambda u: g(u) - x1, (us[k], us[k + 1]), prec)
    raise NotRenormalizable("no renormalization interval boundary found")


def verify_conjugacy(
    F: HenonLikeMap, RF: HenonLikeMap, scope: ScopeMap, n: int = 15
) -> float:
    """max |Psi(R F(z)) - F^2(Psi(z))| over an n x n grid of the square."""
    xs = np.linspace(0.05, 0.95, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    Z = np.column_stack([X.ravel(), Y.ravel()])
    lhs = scope.forward(RF.eval_many(Z))
    rhs = F.eval_many(F.eval_many(scope.forward(Z)))
    return float(np.abs(lhs - rhs).max())


# ---------------------------------------------------------------------------
# towers


@dataclass(frozen=True)
class RenormReport:
    """Per-level diagnostics of the asymptotic Jacobian form."""

    level: int
    fitted_b_pow: float
    fitted_a: SpectralFn1D | None
    residual_rate: float
    thickness: float
    f_drift: float | None = None  # sup distance of f_level to a reference


@dataclass
class Tower:
    """Renormalization tower F_0 .. F_n with the scope maps between them."""

    maps: list[HenonLikeMap]
    scopes: list[ScopeMap]  # scopes[k] = Psi(F_k): Dom(F_{k+1}) -> Dom(F_k)
    reports: list[dict]

    @property
    def depth(self) -> int:
        return len(self.maps) - 1

    def map_at(self, k: int) -> HenonLikeMap:
        return self.maps[k]

    def scope_chain(self, word) -> "ComposedScope":
        return ComposedScope(self, list(word))

    def extend(self, extra: int, prec: Precision = DEFAULT_PRECISION):
        """Renormalize the deepest map ``extra`` more times in place."""
        for _ in range(extra):
            k = self.depth
            try:
                RF, scope = renormalize_henon(self.maps[k], prec)
            except (NotRenormalizable, ConvergenceError) as exc:
                raise PrecisionExhausted(
                    f"tower broke at level {k + 1}: {exc}", max_level=k
                ) from exc
            self.scopes.append(scope)
            self.maps.append(RF)
            self.reports.append(_light_report(RF, k + 1))
        return self


def _light_report(F: HenonLikeMap, level: int) -> dict:
    return {
        "level": level,
        "thickness": F.thickness,
        "tail_f": F.f.f.tail_bound,
        "degenerate": F.is_degenerate,
    }


def iterate_renormalization(
    F: HenonLikeMap,
    n: int,
    prec: Precision = DEFAULT_PRECISION,
    f_star: UnimodalMap | None = None,
) -> Tower:
    """Tower of n renormalizations with per-level reports.

    Raises PrecisionExhausted (carrying the deepest achieved level) when
    a level fails.
    """
    tower = Tower([F], [], [_light_report(F, 0)])
    tower.extend(n, prec)
    if f_star is not None:
        xs = np.linspace(0, 1, 201)
        ref = f_star(xs)
        for k, lv in enumerate(tower.maps):
            tower.reports[k]["f_drift"] = float(
                np.abs(lv.f(xs) - ref).max()
            )
    return tower


@dataclass(frozen=True)
class ComposedScope:
    """Lazy composition Psi^w = Psi_0^{w_0} o ... o Psi_k^{w_k}."""

    tower: Tower
    word: list

    def __post_init__(self):
        if len(self.word) > len(self.tower.scopes):
            raise ValidationError(
                f"word length {len(self.word)} exceeds tower depth "
                f"{len(self.tower.scopes)}"
            )

    def forward(self, P) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        for k in range(len(self.word) - 1, -1, -1):
            P = self.tower.scopes[k].forward(P)
            if self.word[k] == 1:
                P = self.tower.maps[k].eval_many(P)
        return P

    def __call__(self, P):
        return self.forward(P)


def scope_composition(tower: Tower, word) -> ComposedScope:
    """The w-scope map as a lazy composition with derivative access."""
    return ComposedScope(tower, [int(w) for w in word])


def tip(tower: Tower, depth: int) -> tuple[np.ndarray, float]:
    """Center and diameter of Psi^{0^depth}([0,1]^2).

    The diameter bounds the distance to the true tip.
    """
    if depth > tower.depth:
        raise ValidationError(f"tip depth {depth} exceeds tower {tower.depth}")
    if depth == 0:
        return np.array([0.5, 0.5]), float(np.sqrt(2.0))
    chain = scope_composition(tower, [0] * depth)
    ts = np.linspace(0.0, 1.0, 9)
    B = np.vstack(
        [
            np.column_stack([ts, np.zeros_like(ts)]),
            np.column_stack([ts, np.ones_like(ts)]),
            np.column_stack([np.zeros_like(ts), ts]),
            np.column_stack([np.ones_like(ts), ts]),
        ]
    )
    img = chain.forward(B)
    center = img.mean(axis=0)
    d = np.sqrt(
        ((img[:, None, :] - img[None, :, :]) ** 2).sum(-1)
    ).max()
    return center, float(d)


# ---------------------------------------------------------------------------
# asymptotic-form fit


def asymptotic_fit(
    tower: Tower,
    n: int,
    fstar_fixed_x: float,
    grid: tuple[int, int] = (33, 17),
) -> RenormReport:
    """Rank-one fit Jac F_n(x, y) ~ t * a(x) on a grid.

    ``a`` is normalized to 1 at the fixed-point abscissa of the unimodal
    fixed point, so the scalar t estimates b^(2^n).  residual_rate is the
    relative size of what the separable form leaves unexplained (the
    O(rho^n) factor plus fit noise).
    """
    F = tower.map_at(n)
    if F.is_degenerate:
        raise ValidationError("asymptotic fit undefined for degenerate maps")
    xs = cheb_nodes(grid[0], 0.0, 1.0)
    ys = np.linspace(0.05, 0.95, grid[1])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    J = np.asarray(F.jac_det(X, Y), dtype=np.float64)
    # best separable approximation J ~ u(x) w(y)^T
    U, S, Vt = np.linalg.svd(J, full_matrices=False)
    u = U[:, 0] * S[0]
    w = Vt[0]
    sgn = np.sign(w.mean())
    u, w = u * sgn, w * sgn
    resid = float(np.linalg.norm(J - np.outer(u, w)) / np.linalg.norm(J))
    y_var = float(np.std(w) / max(abs(w.mean()), 1e-300))
    a_vals = u * w.mean()
    a_fn = SpectralFn1D.from_values(a_vals, (0.0, 1.0))
    a_at_fix = float(a_fn(fstar_fixed_x))
    if a_at_fix == 0.0:
        raise ValidationError("fitted a vanishes at the normalization point")
    t = abs(a_at_fix)
    a_norm = SpectralFn1D(a_fn.coeffs / a_at_fix, (0.0, 1.0))
    return RenormReport(
        level=n,
        fitted_b_pow=t,
        fitted_a=a_norm,
        residual_rate=float(np.hypot(resid, y_var)),
        thickness=F.thickness,
    )
