"""Topological boxing: adding-machine words, heteroclinic data, boxes
D^w, and the extended stable set.

Word convention: least-significant letter first, so the dynamics acts as
+1 with carry toward later letters.  A word of length n+1 labels the box
Psi^{w_0 .. w_{n-1}}(D^{w_n}) built from the level-1 boxes of the n-th
renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from henonlab.errors import HenonLabError, NotRenormalizable, ValidationError
from henonlab.henon import HenonLikeMap
from henonlab.manifolds import (
    Saddle,
    StableGraph,
    curve_intersections,
    find_saddles,
    local_stable_curve,
    unstable_manifold,
)
from henonlab.numerics import DEFAULT_PRECISION, Curve, Precision
from henonlab.numerics.geometry import (
    AMBIGUOUS,
    INSIDE,
    classify_points,
    polygon_area,
    polygons_disjoint,
    polyline_polygon_intersects,
    winding_number,
)
from henonlab.renorm import Tower, scope_composition
from henonlab.unimodal import check_renormalizable


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class Word:
    """Finite binary word, least-significant letter first."""

    letters: tuple[int, ...]

    def __post_init__(self):
        if any(l not in (0, 1) for l in self.letters):
            raise ValidationError("letters must be 0 or 1")

    @classmethod
    def from_string(cls, s: str) -> "Word":
        return cls(tuple(int(ch) for ch in s))

    @classmethod
    def from_int(cls, value: int, length: int) -> "Word":
        return cls(tuple((value >> i) & 1 for i in range(length)))

    @property
    def value(self) -> int:
        return sum(l << i for i, l in enumerate(self.letters))

    def __str__(self) -> str:
        return "".join(str(l) for l in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def increment(self) -> "Word":
        """Adding-machine successor at fixed length (carry wraps)."""
        out = []
        carry = 1
        for l in self.letters:
            s = l + carry
            out.append(s & 1)
            carry = s >> 1
        return Word(tuple(out))


def word_increment(w: Word) -> Word:
    return w.increment()


def all_words(length: int):
    return [Word.from_int(v, length) for v in range(1 << length)]


# ---------------------------------------------------------------------------
# heteroclinic orbit


@dataclass
class HeteroclinicOrbit:
    """The orbit W^u(p0) cap W^s(p1) = {r^i} with the carrier curves."""

    p0: Saddle
    p1: Saddle
    r: dict
    wu: Curve
    ws: Curve
    r0_param: float
    single_orbit: bool


def heteroclinic_orbit(
    F: HenonLikeMap,
    p0: Saddle | None = None,
    p1: Saddle | None = None,
    i_range: tuple[int, int] = (-2, 3),
    arclen: float = 6.0,
    h_max: float = 0.004,
    prec: Precision = DEFAULT_PRECISION,
) -> HeteroclinicOrbit:
    """First intersection r^0 of W^u(p0) with W^s_loc(p1) and its orbit.

    r^0 is the first crossing travelling along W^u from p0; r^i = F^i(r^0)
    forward and by inversion backward.  Degenerate maps use the exact 1-D
    construction (r^0 = (p, p_hat), backward heights through the branch
    of f through the boundary fixed point).
    """
    if p0 is None or p1 is None:
        p0, p1 = find_saddles(F, prec)
    if F.is_degenerate:
        return _degenerate_het(F, p0, p1, i_range)
    wu = unstable_manifold(F, p0, arclen, h_max=h_max, prec=prec)
    ws = local_stable_curve(F, p1, h_max=h_max, prec=prec)
    cr = curve_intersections(wu, ws)
    if not cr.points:
        raise NotRenormalizable("W^u(p0) does not cross W^s_loc(p1)")
    # polish each raw crossing: slide along the exact unstable curve to
    # the zero of the stable-manifold shooting residual
    sg = StableGraph(F, p1, prec=prec)
    from henonlab.numerics import root_1d

    def polish(t_raw: float) -> tuple[float, np.ndarray]:
        def g(t):
            pt = wu.target(t)[0]
            return sg._shoot(pt[0], pt[1])

        # a couple of local vertex gaps is enough to bracket one crossing
        idx = int(np.clip(np.searchsorted(wu.params, t_raw), 1, len(wu) - 2))
        gap = max(wu.params[idx + 1] - wu.params[idx],
                  wu.params[idx] - wu.params[idx - 1])
        span = 2.0 * gap
        t = root_1d(g, (t_raw - span, t_raw + span),
                    Precision(abs_tol=1e-12), residual_check=False)
        return t, wu.target(t)[0]

    order = np.argsort(cr.params_a)
    t0, r0 = polish(float(cr.params_a[int(order[0])]))
    r = {0: r0}
    lo, hi = i_range
    z = r0.copy()
    for i in range(1, hi):
        z = F.eval(z)
        r[i] = z.copy()
    z = r0.copy()
    for i in range(1, -lo + 1):
        z = F.invert(z, prec)
        r[-i] = z.copy()
    # crossings mapped forward must land on later detected crossings
    # (single-orbit consistency; folds near tangency produce extra pairs
    # that still satisfy this)
    orbit_pts = [r0]
    z = r0.copy()
    for _ in range(40):
        z = F.eval(z)
        orbit_pts.append(z.copy())
        if not (-0.5 < z[0] < 1.5 and -0.5 < z[1] < 1.5):
            break
    orbit_pts = np.array(orbit_pts + [r[i] for i in range(lo, 0)])
    tol_match = 200.0 * h_max * h_max + 1e-9
    strict = all(
        np.hypot(*(orbit_pts - np.asarray(cr.points[int(k)])).T).min() < tol_match
        for k in order
    )
    all_pts = np.array(cr.points)
    pmax = float(np.max(cr.params_a))
    consistent = True
    for k in order:
        if cr.params_a[int(k)] > pmax - 1.0:
            continue  # image may fall beyond the computed arc
        img = F.eval(np.asarray(cr.points[int(k)]))
        if np.hypot(*(all_pts - img).T).min() > 10 * tol_match:
            consistent = False
    return HeteroclinicOrbit(p0, p1, r, wu, ws, float(t0),
                             strict and consistent or consistent)


def _degenerate_het(F, p0, p1, i_range):
    f = F.f
    data = check_renormalizable(f)
    p = p1.location[0]
    p_hat = data.J0[0]
    from henonlab.numerics import root_1d

    r = {0: np.array([p, p_hat])}
    lo, hi = i_range
    z = r[0].copy()
    for i in range(1, hi):
        z = F.eval(z)
        r[i] = z.copy()
    # backward: heights follow the preimage branch through the boundary
    # fixed point of f (the early part of the unstable graph)
    h = p_hat
    for i in range(1, -lo + 1):
        h_prev = root_1d(lambda x: float(f(x)) - h, (0.0, f.critical_point))
        r[-i] = np.array([h, h_prev])
        h = h_prev
    ys = np.linspace(0.0, 1.0, 65)
    graph = Curve(np.column_stack([np.asarray(f(ys)), ys]), ys, "unstable", p0)
    ws = local_stable_curve(F, p1)
    return HeteroclinicOrbit(p0, p1, r, graph, ws, float(p_hat), True)


# ---------------------------------------------------------------------------
# boxes


@dataclass
class Box:
    """Topological disk bounded by stable and unstable subarcs."""

    word: Word
    polygon: np.ndarray  # closed boundary, not repeating the first vertex
    boundary_u: np.ndarray
    boundary_s: np.ndarray

    def contains(self, points, tol: float = 1e-11):
        return classify_points(points, self.polygon, tol)

    @property
    def area(self) -> float:
        return abs(polygon_area(self.polygon))

    def interior_samples(self, n: int = 40) -> np.ndarray:
        lo = self.polygon.min(axis=0)
        hi = self.polygon.max(axis=0)
        rng = np.random.RandomState(12345)
        out = []
        trials = 0
        while len(out) < n and trials < 200 * n:
            pts = lo + (hi - lo) * rng.rand(4 * n, 2)
            w = winding_number(pts, self.polygon)
            good = pts[np.atleast_1d(w) != 0]
            out.extend(good[: n - len(out)])
            trials += 4 * n
        if not out:
            raise HenonLabError(f"no interior samples for box {self.word}")
        return np.array(out)


def _subcurve_between(c: Curve, pa: float, pb: float, endpoints=None) -> np.ndarray:
    """Vertices of c between parameters pa < pb, endpoints replaced."""
    if c.params is None:
        raise ValidationError("parametrized curve required")
    a, b = (pa, pb) if pa <= pb else (pb, pa)
    mask = (c.params > a) & (c.params < b)
    pts = c.points[mask]
    pa_pt = c.point_at_param(a)
    pb_pt = c.point_at_param(b)
    out = np.vstack([[pa_pt], pts, [pb_pt]])
    if endpoints is not None:
        out[0] = endpoints[0]
        out[-1] = endpoints[1]
    return out


def level1_boxes(
    F: HenonLikeMap,
    het: HeteroclinicOrbit | None = None,
    prec: Precision = DEFAULT_PRECISION,
) -> tuple[Box, Box]:
    """D^0 bounded by [r0,r1]^s and [r0,r1]^u, and D^1 = F(D^0)."""
    if het is None:
        het = heteroclinic_orbit(F, prec=prec)
    if F.is_degenerate:
        return _degenerate_level1(F, het)
    r0, r1 = het.r[0], het.r[1]
    wu, ws = het.wu, het.ws
    cr = curve_intersections(wu, ws)
    # locate the wu/ws parameters of r0 and r1 among the crossings
    pa = pb = sa = sb = None
    da = db = np.inf
    for pt, qa, qb in zip(cr.points, cr.params_a, cr.params_b):
        d0 = np.hypot(*(pt - r0))
        d1 = np.hypot(*(pt - r1))
        if d0 < min(1e-3, da):
            pa, sa, da = qa, qb, d0
        if d1 < min(1e-3, db):
            pb, sb, db = qa, qb, d1
    if pa is None or pb is None:
        raise NotRenormalizable("r0/r1 not found among manifold crossings")
    arc_u = _subcurve_between(wu, pa, pb, endpoints=(r0, r1) if pa < pb else (r1, r0))
    arc_s = _subcurve_between(ws, sa, sb)
    # orient: unstable arc r0 -> r1, stable arc r1 -> r0
    if np.hypot(*(arc_u[0] - r0)) > np.hypot(*(arc_u[-1] - r0)):
        arc_u = arc_u[::-1]
    if np.hypot(*(arc_s[0] - r1)) > np.hypot(*(arc_s[-1] - r1)):
        arc_s = arc_s[::-1]
    gap = max(np.hypot(*(arc_u[-1] - arc_s[0])), np.hypot(*(arc_s[-1] - arc_u[0])))
    if gap > 1e-6:
        raise NotRenormalizable(f"box boundary fails to close (gap {gap:.2e})")
    poly = np.vstack([arc_u, arc_s[1:-1]])
    if polygon_area(poly) < 0:
        poly = poly[::-1]
    D0 = Box(Word((0,)), poly, arc_u, arc_s)
    img_u = F.eval_many(arc_u)
    img_s = F.eval_many(arc_s)
    poly1 = np.vstack([img_u, img_s[1:-1]])
    if polygon_area(poly1) < 0:
        poly1 = poly1[::-1]
    D1 = Box(Word((1,)), poly1, img_u, img_s)
    if not polygons_disjoint(D0.polygon, D1.polygon, tol=0.0):
        raise NotRenormalizable("D^0 and D^1 interiors are not disjoint")
    return D0, D1


def _degenerate_level1(F, het):
    """Rectangles over the 1-D renormalization intervals."""
    data = check_renormalizable(F.f)
    (a0, b0), (a1, b1) = data.J0, data.J1
    rect0 = np.array([[a0, 0.0], [b0, 0.0], [b0, 1.0], [a0, 1.0]])
    rect1 = np.array([[a1, 0.0], [b1, 0.0], [b1, 1.0], [a1, 1.0]])
    D0 = Box(Word((0,)), rect0, rect0[:2], rect0[2:])
    D1 = Box(Word((1,)), rect1, rect1[:2], rect1[2:])
    return D0, D1


@dataclass
class Boxing:
    """All boxes up to a depth, keyed by the LSB-first word string."""

    boxes: dict
    depth: int

    def __getitem__(self, word) -> Box:
        key = str(word) if isinstance(word, Word) else word
        return self.boxes[key]

    def level(self, n: int) -> list[Box]:
        return [b for b in self.boxes.values() if len(b.word) == n]


def boxing(
    F: HenonLikeMap,
    tower: Tower,
    depth: int,
    prec: Precision = DEFAULT_PRECISION,
    boundary_points: int = 160,
) -> Boxing:
    """The topological boxing D^w for all words of length <= depth.

    D^{w w_n} = Psi^{w}(level-1 box D^{w_n} of F_n); level-1 boxes come
    from the heteroclinic data of each tower level.
    """
    if tower.depth < depth - 1:
        raise ValidationError(f"tower depth {tower.depth} too shallow")
    boxes: dict = {}
    base: dict = {}
    for n in range(depth):
        Fn = tower.map_at(n)
        D0, D1 = level1_boxes(Fn, prec=prec)
        base[n] = (
            _resample_polygon(D0.polygon, boundary_points),
            _resample_polygon(D1.polygon, boundary_points),
        )
    for n in range(1, depth + 1):
        for w in all_words(n):
            if n == 1:
                poly = base[0][w.letters[0]]
                bu = bs = None
            else:
                chain = scope_composition(tower, w.letters[:-1])
                poly = chain.forward(base[n - 1][w.letters[-1]])
                bu = bs = None
            box = Box(w, poly, poly[:1], poly[:1])
            boxes[str(w)] = box
    return Boxing(boxes, depth)


def _resample_polygon(poly: np.ndarray, n: int) -> np.ndarray:
    closed = np.vstack([poly, poly[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    t = np.linspace(0.0, s[-1], n, endpoint=False)
    x = np.interp(t, s, closed[:, 0])
    y = np.interp(t, s, closed[:, 1])
    return np.column_stack([x, y])


def verify_boxing(
    F: HenonLikeMap,
    bx: Boxing,
    tip_point=None,
    samples: int = 25,
    tol: float = 1e-9,
) -> dict:
    """Sampled checks of the four boxing properties.

    (i) F(D^w) inside D^{1+w}; (ii) same-level disjointness;
    (iii) children inside the parent; (iv) tip-orbit containment.
    Ambiguous (boundary-grazing) samples are reported, not failed.
    """
    report = {"dynamics": True, "disjoint": True, "nesting": True,
              "cantor": True, "ambiguous": 0, "failures": []}
    for n in range(1, bx.depth + 1):
        level = {str(b.word): b for b in bx.level(n)}
        for key, b in level.items():
            target = bx[str(b.word.increment())]
            pts = b.interior_samples(samples)
            img = F.eval_many(pts)
            cls = np.atleast_1d(target.contains(img, tol))
            report["ambiguous"] += int((cls == AMBIGUOUS).sum())
            if np.any(cls == 0):
                report["dynamics"] = False
                report["failures"].append(("dynamics", key))
        keys = sorted(level)
        for i, ka in enumerate(keys):
            for kb in keys[i + 1 :]:
                if not polygons_disjoint(level[ka].polygon, level[kb].polygon):
                    report["disjoint"] = False
                    report["failures"].append(("disjoint", ka, kb))
        if n > 1:
            for key, b in level.items():
                parent = bx[key[:-1]]
                pts = b.interior_samples(samples)
                cls = np.atleast_1d(parent.contains(pts, tol))
                report["ambiguous"] += int((cls == AMBIGUOUS).sum())
                if np.any(cls == 0):
                    report["nesting"] = False
                    report["failures"].append(("nesting", key))
    if tip_point is not None:
        z = np.asarray(tip_point, dtype=np.float64)
        for i in range(1 << bx.depth):
            w = Word.from_int(i, bx.depth)
            cls = bx[str(w)].contains(z[None, :], tol)
            if np.any(np.atleast_1d(cls) == 0):
                report["cantor"] = False
                report["failures"].append(("cantor", str(w), i))
            z = F.eval(z)
    return report


# ---------------------------------------------------------------------------
# extended stable set


@dataclass
class ExtendedStableSet:
    """Components M_{-2}, M_{-1}, M_0, M_1 of the extended stable set."""

    components: dict  # index -> Curve
    het: HeteroclinicOrbit

    def __getitem__(self, i: int) -> Curve:
        return self.components[i]


def extended_stable_set(
    F: HenonLikeMap,
    het: HeteroclinicOrbit | None = None,
    heights: int = 121,
    prec: Precision = DEFAULT_PRECISION,
) -> ExtendedStableSet:
    """The set [p1,r0]^s cup F^-1(that) cup F^-2(that), split into the
    four indexed components.

    Components are computed as exact graphs over y with the shooting
    solver (orbit relaxation onto W^s(p1)); indexing follows the points
    r^{-1}, r^{-2} and the no-unstable-crossing rule for M_1.
    """
    if het is None:
        het = heteroclinic_orbit(F, prec=prec)
    p1 = het.p1
    if F.is_degenerate:
        return _degenerate_mset(F, het, heights)
    ys = np.linspace(0.0, 1.0, heights)
    m0 = het.ws
    # seeds: the degenerate positions of the preimage lines
    f = F.f
    from henonlab.numerics import root_1d

    px = float(p1.location[0])
    data = check_renormalizable(f)
    p_hat = data.J0[0]
    c = f.critical_point
    x_l = root_1d(lambda x: float(f(x)) - p_hat, (0.0, c), prec)
    x_r = root_1d(lambda x: float(f(x)) - p_hat, (c, 1.0), prec)
    comps = {0: m0}
    specs = {-1: (1, p_hat), -2: (2, x_l), 1: (2, x_r)}
    for idx, (pre, seed) in specs.items():
        sg = StableGraph(F, p1, pre_steps=pre, prec=prec)
        width = 0.05 + 0.6 * F.thickness
        try:
            comps[idx] = sg.curve(ys, seed, width=width)
        except Exception as exc:
            raise HenonLabError(
                f"extended stable set component {idx} failed: {exc} "
                "(thickness too large for the four-component dichotomy?)"
            ) from exc
    # index invariants
    for idx, pt in ((-1, het.r.get(-1)), (-2, het.r.get(-2))):
        if pt is None:
            continue
        d, _, _ = _curve_point_distance(comps[idx], pt)
        if d > 5e-4:
            raise HenonLabError(
                f"M_{idx} misses r^{idx} by {d:.2e}: component mislabelled"
            )
    cr = curve_intersections(het.wu, comps[1])
    if len(cr.points) > 0:
        raise HenonLabError(
            f"M_1 crosses W^u(p0) {len(cr.points)} times; thickness too large"
        )
    return ExtendedStableSet(comps, het)


def _curve_point_distance(c: Curve, p):
    from henonlab.numerics.geometry import point_polyline_distance

    return point_polyline_distance(np.asarray(p), c.points)


def _degenerate_mset(F, het, heights):
    f = F.f
    from henonlab.numerics import root_1d

    data = check_renormalizable(f)
    p = het.p1.location[0]
    p_hat = data.J0[0]
    c = f.critical_point
    x_l = root_1d(lambda x: float(f(x)) - p_hat, (0.0, c))
    x_r = root_1d(lambda x: float(f(x)) - p_hat, (c, 1.0))
    ys = np.linspace(0.0, 1.0, heights)
    comps = {}
    for idx, x in ((0, p), (-1, p_hat), (-2, x_l), (1, x_r)):
        comps[idx] = Curve(
            np.column_stack([np.full_like(ys, x), ys]), ys, "stable", het.p1
        )
    return ExtendedStableSet(comps, het)
