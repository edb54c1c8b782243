"""Planar polyline/polygon primitives used by the geometric modules.

Everything works on float64 arrays of shape (n, 2).  Point-location uses
winding numbers; "ambiguous" outcomes (within tol of a boundary) are
reported rather than silently classified.
"""

from __future__ import annotations

import numpy as np

AMBIGUOUS = -1
OUTSIDE = 0
INSIDE = 1


def seg_pair_candidates(P: np.ndarray, Q: np.ndarray, pad: float = 0.0):
    """Index pairs (i, j) whose segment bounding boxes overlap."""
    Pa, Pb = P[:-1], P[1:]
    Qa, Qb = Q[:-1], Q[1:]
    pmin = np.minimum(Pa, Pb) - pad
    pmax = np.maximum(Pa, Pb) + pad
    qmin = np.minimum(Qa, Qb) - pad
    qmax = np.maximum(Qa, Qb) + pad
    ok = (
        (pmin[:, None, 0] <= qmax[None, :, 0])
        & (pmax[:, None, 0] >= qmin[None, :, 0])
        & (pmin[:, None, 1] <= qmax[None, :, 1])
        & (pmax[:, None, 1] >= qmin[None, :, 1])
    )
    return np.argwhere(ok)


def segment_intersection(p0, p1, q0, q1, eps=1e-14):
    """Intersection of two closed segments.

    Returns (s, t, point) with s, t in [0, 1], or None when disjoint or
    degenerate/parallel.
    """
    r = p1 - p0
    s = q1 - q0
    denom = r[0] * s[1] - r[1] * s[0]
    scale = max(abs(r[0]) + abs(r[1]), abs(s[0]) + abs(s[1]), 1e-300)
    if abs(denom) <= eps * scale * scale:
        return None
    d = q0 - p0
    u = (d[0] * s[1] - d[1] * s[0]) / denom
    v = (d[0] * r[1] - d[1] * r[0]) / denom
    if -eps <= u <= 1.0 + eps and -eps <= v <= 1.0 + eps:
        return float(u), float(v), p0 + u * r
    return None


def polyline_intersections(P: np.ndarray, Q: np.ndarray):
    """All transverse crossings between two polylines.

    Returns a list of dicts with segment indices, local parameters, the
    crossing point and the sign of the cross product of the segment
    directions (+1 when P crosses Q from right to left).
    """
    out = []
    for i, j in seg_pair_candidates(P, Q):
        hit = segment_intersection(P[i], P[i + 1], Q[j], Q[j + 1])
        if hit is None:
            continue
        u, v, pt = hit
        r = P[i + 1] - P[i]
        s = Q[j + 1] - Q[j]
        cr = r[0] * s[1] - r[1] * s[0]
        out.append(
            {
                "i": int(i),
                "j": int(j),
                "u": u,
                "v": v,
                "point": pt,
                "sign": int(np.sign(cr)),
            }
        )
    # drop duplicates from crossings that land on shared vertices
    dedup = []
    for h in sorted(out, key=lambda h: (h["i"], h["u"])):
        if dedup and np.hypot(*(h["point"] - dedup[-1]["point"])) < 1e-12:
            continue
        dedup.append(h)
    return dedup


def _seg_dist_sq(p, a, b):
    """Squared distances from points p to segments (a, b), all (n,2)."""
    ab = b - a
    ap = p - a
    denom = (ab * ab).sum(axis=-1)
    denom = np.where(denom == 0.0, 1.0, denom)
    t = np.clip((ap * ab).sum(axis=-1) / denom, 0.0, 1.0)
    proj = a + t[..., None] * ab
    d = p - proj
    return (d * d).sum(axis=-1), t


def point_polyline_distance(p, P: np.ndarray):
    """(distance, segment index, local parameter) of the closest point."""
    a, b = P[:-1], P[1:]
    d2, t = _seg_dist_sq(np.asarray(p)[None, :], a, b)
    k = int(np.argmin(d2))
    return float(np.sqrt(d2[k])), k, float(t[k])


def polyline_min_distance(P: np.ndarray, Q: np.ndarray):
    """Minimum distance between two polylines with witness points.

    Returns (dist, p_witness, q_witness).  Exact on the piecewise-linear
    geometry (vertex-to-segment both ways; crossing means zero).
    """
    if polyline_intersections(P, Q):
        hits = polyline_intersections(P, Q)
        pt = hits[0]["point"]
        return 0.0, pt.copy(), pt.copy()
    best = (np.inf, None, None)
    # vertex of P against segments of Q, chunked to bound memory
    for X, Y, swap in ((P, Q, False), (Q, P, True)):
        a, b = Y[:-1], Y[1:]
        for lo in range(0, len(X), 512):
            chunk = X[lo : lo + 512]
            d2, t = _seg_dist_sq(chunk[:, None, :], a[None, :, :], b[None, :, :])
            k = np.unravel_index(np.argmin(d2), d2.shape)
            d = float(np.sqrt(d2[k]))
            if d < best[0]:
                xw = chunk[k[0]]
                yw = a[k[1]] + t[k] * (b[k[1]] - a[k[1]])
                best = (d, yw if swap else xw, xw if swap else yw)
    return best


def winding_number(points, poly: np.ndarray):
    """Winding numbers of points with respect to a closed polygon.

    ``poly`` need not repeat its first vertex.  Vectorized over points.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    V = np.asarray(poly, dtype=np.float64)
    if np.hypot(*(V[0] - V[-1])) > 0:
        V = np.vstack([V, V[0]])
    a = V[:-1][None, :, :] - pts[:, None, :]
    b = V[1:][None, :, :] - pts[:, None, :]
    ang = np.arctan2(
        a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        (a * b).sum(axis=-1),
    )
    w = np.rint(ang.sum(axis=-1) / (2.0 * np.pi)).astype(int)
    return w if np.ndim(points) > 1 else int(w[0])


def classify_points(points, poly: np.ndarray, tol: float):
    """INSIDE/OUTSIDE/AMBIGUOUS per point, with a tol-inflated boundary."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    w = np.atleast_1d(winding_number(pts, poly))
    closed = np.vstack([poly, poly[0]])
    a, b = closed[:-1], closed[1:]
    res = np.empty(len(pts), dtype=int)
    for i, p in enumerate(pts):
        d2, _ = _seg_dist_sq(p[None, :], a, b)
        if np.sqrt(d2.min()) <= tol:
            res[i] = AMBIGUOUS
        else:
            res[i] = INSIDE if w[i] != 0 else OUTSIDE
    return res if np.ndim(points) > 1 else int(res[0])


def polygon_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(
        np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))
    )


def polygons_disjoint(A: np.ndarray, B: np.ndarray, tol: float = 0.0) -> bool:
    """True when two simple polygons have disjoint interiors.

    Sampled check: interior points of each polygon (grid, strictly
    inside) must not fall strictly inside the other.  Shared boundary
    arcs and corners are allowed.
    """
    for X, Y in ((A, B), (B, A)):
        pts = _interior_grid(X, tol)
        if len(pts) and np.any(np.atleast_1d(classify_points(pts, Y, tol)) == INSIDE):
            return False
    return True


def _interior_grid(poly: np.ndarray, tol: float, n: int = 12) -> np.ndarray:
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    xs = np.linspace(lo[0], hi[0], n + 2)[1:-1]
    ys = np.linspace(lo[1], hi[1], n + 2)[1:-1]
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    cls = np.atleast_1d(classify_points(pts, poly, tol))
    return pts[cls == INSIDE]


def polyline_polygon_intersects(P: np.ndarray, poly: np.ndarray, tol=0.0) -> bool:
    """True when a polyline touches a polygon (boundary or interior)."""
    closed = np.vstack([poly, poly[:1]])
    if polyline_intersections(P, closed):
        return True
    cls = classify_points(P, poly, tol)
    return bool(np.any(np.atleast_1d(cls) == INSIDE))
