"""Saddles and their invariant manifolds.

Globalization iterates a geometrically parametrized fundamental domain
on the eigenline under F^(effective period); the offset is chosen so the
local linear-manifold error stays below tolerance (with a Richardson
halving check available).  Flip saddles use the doubled period so each
branch is invariant.  Stable manifolds are unstable manifolds of the
inverse map; degenerate maps get the exact vertical-line fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from henonlab.errors import (
    ConvergenceError,
    DegenerateMap,
    HenonLabError,
    ValidationError,
)
from henonlab.henon import HenonLikeMap
from henonlab.numerics import (
    DEFAULT_PRECISION,
    Curve,
    Precision,
    refine_curve,
)
from henonlab.numerics.geometry import (
    point_polyline_distance,
    polyline_intersections,
    polyline_min_distance,
)

BBOX_DEFAULT = (-0.3, 1.3, -0.4, 1.45)


@dataclass(frozen=True)
class Saddle:
    """Periodic saddle with orbit-product eigendata."""

    location: np.ndarray
    period: int
    lambda_s: float
    lambda_u: float
    eig_s: np.ndarray
    eig_u: np.ndarray
    flip: bool

    def __post_init__(self):
        object.__setattr__(
            self, "location", np.asarray(self.location, dtype=np.float64)
        )


def _eig_2x2(M: np.ndarray):
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0:
        raise ConvergenceError("complex eigenvalues at periodic point")
    r = np.sqrt(disc)
    lams = np.array([(tr + r) / 2.0, (tr - r) / 2.0])
    vecs = []
    for lam in lams:
        # eigenvector of [[a, b], [c, d]] for eigenvalue lam
        a, b_, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        v = np.array([b_, lam - a])
        if np.hypot(*v) < 1e-14:
            v = np.array([lam - d, c])
        if np.hypot(*v) < 1e-14:
            v = np.array([1.0, 0.0])
        v = v / np.hypot(*v)
        if v[int(np.argmax(np.abs(v)))] < 0:
            v = -v
        vecs.append(v)
    return lams, vecs


def _orbit_product(F: HenonLikeMap, z0: np.ndarray, n: int):
    """(endpoint, product of DF along the orbit, orbit points)."""
    z = np.asarray(z0, dtype=np.float64)[None, :]
    M = np.eye(2)
    orbit = [z[0].copy()]
    for _ in range(n):
        J = F.jacobian(z)[0]
        M = J @ M
        z = F.eval_many(z)
        orbit.append(z[0].copy())
    return z[0], M, np.array(orbit)


def _saddle_from_point(F: HenonLikeMap, z: np.ndarray, period: int) -> Saddle:
    _, M, _ = _orbit_product(F, z, period)
    lams, vecs = _eig_2x2(M)
    iu = int(np.argmax(np.abs(lams)))
    lam_u, lam_s = float(lams[iu]), float(lams[1 - iu])
    if not (abs(lam_u) > 1.0 and abs(lam_s) < 1.0):
        raise ConvergenceError(
            f"point is not a saddle (|eigs| = {abs(lam_u):.3f}, {abs(lam_s):.3f})"
        )
    return Saddle(
        z, period, lam_s, lam_u, vecs[1 - iu], vecs[iu], flip=lam_u < 0.0
    )


def newton_periodic(
    F: HenonLikeMap,
    seed,
    period: int,
    prec: Precision = DEFAULT_PRECISION,
    max_iter: int = 40,
) -> Saddle:
    """Newton for F^period(z) = z with the orbit-product Jacobian."""
    z = np.asarray(seed, dtype=np.float64).copy()
    for _ in range(max_iter):
        fz, M, _ = _orbit_product(F, z, period)
        r = fz - z
        if np.abs(r).max() < prec.abs_tol:
            return _saddle_from_point(F, z, period)
        try:
            step = np.linalg.solve(M - np.eye(2), r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular periodic-orbit Newton") from exc
        z = z - step
        if np.abs(z).max() > 10.0:
            raise ConvergenceError("periodic-orbit Newton escaped")
    raise ConvergenceError(f"periodic Newton stalled (res {np.abs(r).max():.2e})")


def find_saddles(
    F: HenonLikeMap, prec: Precision = DEFAULT_PRECISION
) -> tuple[Saddle, Saddle]:
    """The boundary non-flip saddle p0 and the interior flip saddle p1.

    All fixed points lie on the diagonal (the second coordinate of F is
    x), so the search is one-dimensional.
    """
    from henonlab.numerics import root_1d

    def g(x):
        return float(F.f(x)) - F.eps(x, x) - x

    xs = np.linspace(0.0, 1.0, 401)
    vals = np.array([g(x) for x in xs])
    roots = []
    for k in range(len(xs) - 1):
        if vals[k] == 0.0:
            roots.append(float(xs[k]))
        elif vals[k] * vals[k + 1] < 0.0:
            roots.append(root_1d(g, (xs[k], xs[k + 1]), prec))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    # boundary fixed points do not produce interior sign changes
    df = F.f.f.deriv()
    for xb in (0.0, 1.0):
        if abs(g(xb)) < 1e-7 and not any(abs(r - xb) < 1e-3 for r in roots):
            x = xb
            for _ in range(5):
                d = float(df(x)) - (F.eps(x + 1e-7, x + 1e-7)
                                    - F.eps(x - 1e-7, x - 1e-7)) / 2e-7 - 1.0
                if d == 0.0:
                    break
                x = x - g(x) / d
            if abs(g(x)) < prec.abs_tol:
                roots.append(float(x))
    p0 = p1 = None
    for r in roots:
        z = np.array([r, r])
        if F.is_degenerate:
            lam = float(F.f.deriv(r))
            sad = Saddle(
                z, 1, 0.0, lam, np.array([0.0, 1.0]),
                np.array([lam, 1.0]) / np.hypot(lam, 1.0), flip=lam < 0.0,
            )
            if abs(lam) <= 1.0:
                continue
        else:
            try:
                sad = _saddle_from_point(F, z, 1)
            except ConvergenceError:
                continue
        if sad.flip and r > 0.02:
            p1 = sad
        elif not sad.flip and (r < 0.02 or r > 0.98):
            p0 = sad
    if p0 is None or p1 is None:
        raise ConvergenceError(
            f"expected boundary non-flip and interior flip saddles, "
            f"found roots {roots}"
        )
    return p0, p1


def find_periodic_saddle(
    F: HenonLikeMap, m: int, tower, prec: Precision = DEFAULT_PRECISION
) -> Saddle:
    """The period-2^m saddle, seeded through the scope maps.

    Seeds Newton for F^(2^m) at Psi^{0^m}(p1(F_m)), the scope image of
    the flip fixed point of the m-th renormalization.
    """
    if m == 0:
        return find_saddles(F, prec)[1]
    from henonlab.renorm import scope_composition

    if tower.depth < m:
        raise ValidationError(f"tower depth {tower.depth} < m={m}")
    _, p1_m = find_saddles(tower.map_at(m), prec)
    seed = scope_composition(tower, [0] * m).forward(p1_m.location[None, :])[0]
    return newton_periodic(F, seed, 1 << m, prec)


# ---------------------------------------------------------------------------
# manifold globalization


class InverseMap:
    """F^{-1} as an evaluable map object (for stable manifolds)."""

    def __init__(self, F: HenonLikeMap, prec: Precision = DEFAULT_PRECISION):
        if F.is_degenerate:
            raise DegenerateMap("degenerate maps are not invertible")
        self.F = F
        self.prec = prec

    def eval_many(self, P) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=np.float64))
        F = self.F
        X = P[:, 1]
        # solve f(X) - y eta(X, y) = p_x for y; constant eta has a closed form
        if F.eta.degree == (0, 0):
            b = float(F.eta.coeffs[0, 0])
            Y = (F.f(X) - P[:, 0]) / b
            return np.column_stack([X, Y])
        ylo, yhi = F.eta.rect[2], F.eta.rect[3]
        Y = np.full(len(P), 0.5)
        ok = np.zeros(len(P), dtype=bool)
        for _ in range(60):
            g = F.f(X) - Y * F.eta(X, Y) - P[:, 0]
            d = -(F.eta(X, Y) + Y * F._eta_dy(X, Y))
            Y = np.clip(Y - g / np.where(d == 0.0, 1.0, d), ylo, yhi)
            ok = np.abs(g) < self.prec.abs_tol
            if ok.all():
                break
        if not ok.all():
            for i in np.flatnonzero(~ok):
                Y[i] = self.F.invert(P[i], self.prec)[1]
        return np.column_stack([X, Y])

    def jacobian(self, P) -> np.ndarray:
        pre = self.eval_many(P)
        J = self.F.jacobian(pre)
        return np.linalg.inv(J)


def _local_delta(tol: float, ratio: float) -> float:
    """Eigenline offset so the linear-manifold error stays below tol."""
    d = np.sqrt(0.1 * tol) / max(ratio, 1.0)
    return float(np.clip(d, 1e-9, 1e-5))


def _globalize(
    mapobj,
    saddle_loc: np.ndarray,
    direction: np.ndarray,
    lam_eff: float,
    arclen: float,
    h_max: float,
    angle_max: float,
    bbox,
    prec: Precision,
    delta: float | None = None,
    max_pieces: int = 60,
    kind: str = "generic",
    owner=None,
) -> Curve:
    """Grow one manifold branch by iterating a fundamental domain.

    The fundamental domain is the eigenline segment between delta and
    lam_eff * delta from the saddle, parametrized geometrically; piece k
    is its image under mapobj^k, refined adaptively.
    """
    ratio = abs(lam_eff)
    if ratio <= 1.0:
        raise ValidationError("effective multiplier must be expanding")
    if delta is None:
        delta = _local_delta(prec.abs_tol, ratio)
    e = direction / np.hypot(*direction)

    def seg_points(s):
        # s in [0,1]: geometric parameter along the fundamental domain
        r = delta * ratio ** np.asarray(s)
        return saddle_loc[None, :] + r[:, None] * e[None, :]

    def make_target(k):
        def target(s):
            P = seg_points(np.atleast_1d(s))
            for _ in range(k):
                P = mapobj.eval_many(P)
                np.nan_to_num(P, copy=False, nan=1e6, posinf=1e6, neginf=-1e6)
                np.clip(P, -1e6, 1e6, out=P)
            return P

        return target

    def inside_mask(pts):
        return (
            (pts[:, 0] > bbox[0])
            & (pts[:, 0] < bbox[1])
            & (pts[:, 1] > bbox[2])
            & (pts[:, 1] < bbox[3])
        )

    pieces = []
    params = []
    total = 0.0
    s0 = np.linspace(0.0, 1.0, 33)
    for k in range(max_pieces):
        target = make_target(k)
        pts = target(s0)
        inside = inside_mask(pts)
        clipped = not inside.all()
        if clipped:
            first_out = int(np.argmin(inside))
            if first_out < 2:
                break
            # keep one point past the boundary so the cut lands outside
            ss = s0[: first_out + 1]
        else:
            ss = s0
        cur = refine_curve(Curve(target(ss), ss, kind), target, h_max, angle_max)
        inside = inside_mask(cur.points)
        if not inside.all():
            keep = int(np.argmin(inside)) + 1
            if keep < 2:
                break
            cur = Curve(cur.points[:keep], cur.params[:keep], kind)
            clipped = True
        pieces.append(cur)
        params.append(cur.params + k)
        total += cur.length()
        if clipped or total >= arclen:
            break
    if not pieces:
        raise HenonLabError("manifold globalization produced no points")
    pts = np.vstack([p.points if i == 0 else p.points[1:]
                     for i, p in enumerate(pieces)])
    par = np.concatenate([q if i == 0 else q[1:]
                          for i, q in enumerate(params)])

    def global_target(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
        ks = np.floor(ts).astype(int)
        out = np.empty((len(ts), 2))
        for k in np.unique(ks):
            m = ks == k
            out[m] = make_target(int(k))(ts[m] - k)
        return out

    curve = Curve(pts, par, kind, owner, target=global_target)
    return curve.prefix_by_arclength(arclen)


def unstable_manifold(
    F: HenonLikeMap,
    p: Saddle,
    arclen: float,
    h_max: float = 0.01,
    angle_max: float = 0.2,
    bbox=BBOX_DEFAULT,
    prec: Precision = DEFAULT_PRECISION,
    branch: int = +1,
    delta: float | None = None,
) -> Curve:
    """W^u(p) out to the requested arclength, one branch.

    ``branch`` picks the eigenvector sign; flip saddles iterate F^(2 per)
    so the branch is invariant.
    """
    per_eff = p.period * (2 if p.lambda_u < 0 else 1)
    lam_eff = p.lambda_u ** (2 if p.lambda_u < 0 else 1)

    class _Iter:
        def eval_many(self, P):
            for _ in range(per_eff):
                P = F.eval_many(P)
            return P

    return _globalize(
        _Iter(), p.location, branch * p.eig_u, lam_eff, arclen,
        h_max, angle_max, bbox, prec, delta, kind="unstable", owner=p,
    )


def stable_manifold(
    F: HenonLikeMap,
    p: Saddle,
    arclen: float,
    h_max: float = 0.01,
    angle_max: float = 0.2,
    bbox=BBOX_DEFAULT,
    prec: Precision = DEFAULT_PRECISION,
    branch: int = +1,
    delta: float | None = None,
) -> Curve:
    """W^s(p): the unstable manifold of the inverse map.

    Degenerate maps return the exact vertical line through p (local
    stable sets of degenerate Henon-like maps are vertical lines).
    """
    if F.is_degenerate:
        x = float(p.location[0])
        ys = np.linspace(bbox[2] if branch < 0 else p.location[1],
                         p.location[1] if branch < 0 else bbox[3], 64)
        pts = np.column_stack([np.full_like(ys, x), ys])
        return Curve(pts, ys, "stable", p)
    if p.lambda_s == 0.0:
        raise DegenerateMap("stable eigenvalue vanishes")
    inv = InverseMap(F, prec)
    per_eff = p.period * (2 if p.lambda_s < 0 else 1)
    lam_eff = (1.0 / p.lambda_s) ** (2 if p.lambda_s < 0 else 1)

    class _Iter:
        def eval_many(self, P):
            for _ in range(per_eff):
                P = inv.eval_many(P)
            return P

    return _globalize(
        _Iter(), p.location, branch * p.eig_s, lam_eff, arclen,
        h_max, angle_max, bbox, prec, delta, kind="stable", owner=p,
    )


def local_stable_curve(
    F: HenonLikeMap,
    p: Saddle,
    bbox=(0.0, 1.0, 0.0, 1.0),
    n_points: int = 281,
    h_max: float | None = None,
    prec: Precision = DEFAULT_PRECISION,
) -> Curve:
    """W^s_loc(p) as an exact graph x = S(y) spanning the box vertically.

    Uses the shooting solver, so vertices are on the manifold to solver
    accuracy (no inverse-orbit drift); the parameter is the height y.
    """
    if F.is_degenerate:
        x = float(p.location[0])
        ys = np.linspace(bbox[2], bbox[3], 65)

        def vline(ts):
            ts = np.atleast_1d(ts)
            return np.column_stack([np.full_like(ts, x), ts])

        return Curve(np.column_stack([np.full_like(ys, x), ys]), ys,
                     "stable", p, target=vline)
    sg = StableGraph(F, p, pre_steps=0, prec=prec)
    if h_max is not None:
        n_points = max(n_points, int((bbox[3] - bbox[2]) / h_max) + 2)
    ys = np.linspace(bbox[2], bbox[3], n_points)
    width = 0.04 + 0.8 * min(F.thickness, 0.4)
    # continue outward from the saddle height in both directions
    order = np.argsort(np.abs(ys - p.location[1]))
    xs = np.empty_like(ys)
    got = {}
    for i in order:
        near = min(got, key=lambda j: abs(ys[j] - ys[i])) if got else None
        x_seed = got[near] if near is not None else float(p.location[0])
        xs[i] = sg.solve(float(ys[i]), (x_seed - width, x_seed + width))
        got[i] = xs[i]

    def graph_target(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
        out = np.empty((len(ts), 2))
        for k, t in enumerate(ts):
            xg = float(np.interp(t, ys, xs))
            out[k] = sg.solve(float(t), (xg - width, xg + width)), t
        return out

    return Curve(np.column_stack([xs, ys]), ys, "stable", p,
                 target=graph_target)


def separates_vertically(curve: Curve, y_lo=0.0, y_hi=1.0, tol=1e-6) -> bool:
    ys = curve.points[:, 1]
    return bool(ys.min() <= y_lo + tol and ys.max() >= y_hi - tol)


class StableGraph:
    """W^s(p) of a flip saddle as an exact graph x = S(y).

    Shooting solve: x is adjusted so that the forward orbit lands on the
    local stable eigenline at the saddle instead of escaping along the
    unstable direction.  Accuracy is limited only by the root solve, not
    by polyline resolution.  ``pre_steps`` extra forward applications of
    F solve for preimage components of W^s (pre_steps = 2 gives the
    curves whose second image lies on W^s_loc).
    """

    def __init__(
        self,
        F: HenonLikeMap,
        p: Saddle,
        pre_steps: int = 0,
        n_land: int = 24,
        prec: Precision = DEFAULT_PRECISION,
    ):
        self.F = F
        self.p = p
        self.pre_steps = pre_steps
        self.prec = prec
        # choose the straddle depth so the unstable readout is O(1)
        lam = abs(p.lambda_u)
        self.n_land = min(n_land, max(6, int(34.0 / max(np.log(lam), 0.1))))
        # left eigenvector dual to e_u (annihilates e_s)
        es = p.eig_s
        w = np.array([-es[1], es[0]])
        self.w_u = w / np.dot(w, p.eig_u)

    def _shoot(self, x: float, y: float) -> float:
        z = np.array([[x, y]])
        F = self.F
        for _ in range(self.pre_steps):
            z = F.eval_many(z)
        per = self.p.period
        d = float(np.dot(z[0] - self.p.location, self.w_u))
        for _ in range(self.n_land * per):
            z = F.eval_many(z)
            d = float(np.dot(z[0] - self.p.location, self.w_u))
            # stop once the unstable readout dominates; keep its sign
            if not np.isfinite(d) or abs(d) > 0.5:
                return np.sign(d) * 0.5 if np.isfinite(d) else 1e3
            if not np.isfinite(z).all() or np.abs(z).max() > 5.0:
                return np.sign(d) * 0.5 if d != 0 else 1e3
        return d

    def solve(self, y: float, x_bracket: tuple[float, float]) -> float:
        from henonlab.numerics import root_1d

        return root_1d(lambda x: self._shoot(x, y), x_bracket,
                       Precision(abs_tol=1e-12), residual_check=False)

    def curve(self, ys, x_seed: float, width: float = 0.05) -> Curve:
        """Graph points at the given heights, continued from x_seed."""
        ys = np.asarray(ys, dtype=np.float64)
        xs = np.empty_like(ys)
        x = x_seed
        for i, y in enumerate(ys):
            x = self.solve(y, (x - width, x + width))
            xs[i] = x
        return Curve(np.column_stack([xs, ys]), ys, "stable", self.p)


# ---------------------------------------------------------------------------
# intersections and clearance


@dataclass(frozen=True)
class CurveCrossings:
    points: list
    signs: list
    params_a: list
    params_b: list
    tangency_candidates: list


def _local_tangent(c: Curve, i: int) -> np.ndarray:
    j0, j1 = max(i - 1, 0), min(i + 1, len(c) - 1)
    d = c.points[j1] - c.points[j0]
    n = np.hypot(*d)
    return d / n if n > 0 else np.array([1.0, 0.0])


def curve_intersections(
    a: Curve, b: Curve, parallel_sin: float = 1e-3
) -> CurveCrossings:
    """Transverse crossings of two curves with near-parallel flagging.

    Each raw polyline crossing is polished by solving the local linear
    parametrizations; pairs meeting at angle below ``parallel_sin`` are
    reported as tangency candidates instead of crossings.
    """
    hits = polyline_intersections(a.points, b.points)
    pts, signs, pa, pb, cands = [], [], [], [], []
    for h in hits:
        ta = _local_tangent(a, h["i"])
        tb = _local_tangent(b, h["j"])
        sin = abs(ta[0] * tb[1] - ta[1] * tb[0])
        if sin < parallel_sin:
            cands.append(h["point"])
            continue
        pts.append(h["point"])
        signs.append(h["sign"])
        if a.params is not None:
            pa.append(float(np.interp(h["i"] + h["u"],
                                      np.arange(len(a)), a.params)))
        if b.params is not None:
            pb.append(float(np.interp(h["j"] + h["v"],
                                      np.arange(len(b)), b.params)))
    return CurveCrossings(pts, signs, pa, pb, cands)


def clearance(a: Curve, b: Curve) -> tuple[float, np.ndarray, np.ndarray]:
    """Minimal distance between two curves with witness points.

    Polished by quadratic interpolation of the squared distance along
    the curve that carries the nearest vertex.
    """
    d, pa, pb = polyline_min_distance(a.points, b.points)
    if d == 0.0:
        return 0.0, pa, pb
    # quadratic polish: slide the witness along its segment neighbors
    _, ka, _ = point_polyline_distance(pa, a.points)
    lo, hi = max(ka - 1, 0), min(ka + 3, len(a.points))
    seg = a.points[lo:hi]
    best = (d, pa, pb)
    ts = np.linspace(0, 1, 21)
    for i in range(len(seg) - 1):
        cand = seg[i][None, :] * (1 - ts)[:, None] + seg[i + 1][None, :] * ts[:, None]
        for q in cand:
            dq, kq, tq = point_polyline_distance(q, b.points)
            if dq < best[0]:
                w = b.points[kq] + tq * (b.points[kq + 1] - b.points[kq])
                best = (dq, q, w)
    return best
