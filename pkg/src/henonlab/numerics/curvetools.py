"""Oriented polyline curves with adaptive parameter refinement."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from henonlab.errors import RefinementBudget, ValidationError


@dataclass(frozen=True)
class Curve:
    """Oriented adaptive polyline, vertex i = target(params[i]).

    ``params`` are preimage parameters in whatever coordinate produced
    the curve (eigenline offset for manifolds, chart parameter for
    boundaries); they increase along the orientation.
    """

    points: np.ndarray
    params: np.ndarray | None = None
    kind: str = "generic"
    owner: object = None
    target: object = None  # optional exact map params -> points

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValidationError("Curve needs an (n >= 2, 2) point array")
        object.__setattr__(self, "points", pts)
        if self.params is not None:
            par = np.ascontiguousarray(self.params, dtype=np.float64)
            if par.shape != (pts.shape[0],):
                raise ValidationError("params length must match points")
            object.__setattr__(self, "params", par)

    def __len__(self) -> int:
        return self.points.shape[0]

    def segment_lengths(self) -> np.ndarray:
        d = np.diff(self.points, axis=0)
        return np.hypot(d[:, 0], d[:, 1])

    def length(self) -> float:
        return float(self.segment_lengths().sum())

    def arclengths(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths())])

    def turning_angles(self) -> np.ndarray:
        """Unsigned turning angle at each interior vertex."""
        d = np.diff(self.points, axis=0)
        cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
        dot = (d[:-1] * d[1:]).sum(axis=1)
        return np.abs(np.arctan2(cross, dot))

    def reversed(self) -> "Curve":
        par = None if self.params is None else self.params[::-1].copy()
        return replace(self, points=self.points[::-1].copy(), params=par)

    def prefix_by_arclength(self, s: float) -> "Curve":
        acc = self.arclengths()
        n = int(np.searchsorted(acc, s, side="right"))
        n = max(2, min(n + 1, len(self)))
        par = None if self.params is None else self.params[:n].copy()
        return replace(self, points=self.points[:n].copy(), params=par)

    def point_at_param(self, t: float) -> np.ndarray:
        if self.params is None:
            raise ValidationError("curve has no parameters")
        x = np.interp(t, self.params, self.points[:, 0])
        y = np.interp(t, self.params, self.points[:, 1])
        return np.array([x, y])


def refine_curve(
    curve: Curve,
    target,
    h_max: float,
    angle_max: float,
    max_points: int = 200_000,
    max_rounds: int = 60,
) -> Curve:
    """Refine a curve until spacing and turning-angle bounds hold.

    ``target`` maps an array of preimage parameters to an (n, 2) array of
    points; inserted vertices are exact images of bisected parameters.
    Raises RefinementBudget when the curve folds below resolution.
    """
    if curve.params is None:
        raise ValidationError("refine_curve needs a parametrized curve")
    pts = curve.points
    par = curve.params
    for _ in range(max_rounds):
        d = np.diff(pts, axis=0)
        seglen = np.hypot(d[:, 0], d[:, 1])
        bad = seglen > h_max
        if angle_max < np.pi:
            cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
            dot = (d[:-1] * d[1:]).sum(axis=1)
            ang = np.abs(np.arctan2(cross, dot))
            sharp = ang > angle_max
            # a sharp interior vertex forces refinement of both segments,
            # unless both are already tiny (true corner in the target)
            tiny = seglen < 1e-13 * max(1.0, h_max)
            bad[:-1] |= sharp & ~(tiny[:-1] & tiny[1:])
            bad[1:] |= sharp & ~(tiny[:-1] & tiny[1:])
        gap = np.abs(np.diff(par)) > 1e-15 * np.maximum(1.0, np.abs(par[:-1]))
        bad &= gap
        if not bad.any():
            return Curve(pts, par, curve.kind, curve.owner)
        if len(pts) + int(bad.sum()) > max_points:
            raise RefinementBudget(
                f"refinement budget exceeded ({len(pts)} points)"
            )
        idx = np.flatnonzero(bad)
        tmid = 0.5 * (par[idx] + par[idx + 1])
        pmid = np.asarray(target(tmid), dtype=np.float64).reshape(-1, 2)
        par = np.insert(par, idx + 1, tmid)
        pts = np.insert(pts, idx + 1, pmid, axis=0)
    raise RefinementBudget("refinement did not settle within max_rounds")


def curve_from_params(target, params, kind="generic", owner=None) -> Curve:
    params = np.asarray(params, dtype=np.float64)
    pts = np.asarray(target(params), dtype=np.float64).reshape(-1, 2)
    return Curve(pts, params, kind, owner)
