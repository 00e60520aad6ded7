"""Homothety types, r-large approximates and their stability bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateInput, InvalidInput, ShapeMismatch, TooSmall
from .geom import ConvexPolygon, PointCloud, convex_hull, diameter, op_norm

__all__ = [
    "HomothetyRep", "LargeApproxWitness", "normalize", "large_approx_check",
    "perturbation_bound", "linear_map_bound",
]

DIAMETER_TOL = 1e-9

# translation search: grid steps as fractions of 1/r, coarse to fine
SEARCH_LEVELS = (4, 10, 20)
_MAX_MOVES = 400


@dataclass(frozen=True, eq=False)
class HomothetyRep:
    """Diameter-one representative of a homothety type, centred at the origin.

    ``polygon`` is set when the type is a filled convex polygon; distances to
    it are then computed exactly, and ``shape`` is a filled sample of it.
    """

    shape: PointCloud
    anchor: np.ndarray
    scale: float
    polygon: ConvexPolygon | None = None


@dataclass(frozen=True)
class LargeApproxWitness:
    r: float
    scale: float
    translation: tuple[float, float]
    achieved_gap: float
    sampling_slack: float

    @property
    def bound(self) -> float:
        return self.achieved_gap + self.sampling_slack


def normalize(K, spacing: float = 1 / 200) -> HomothetyRep:
    """Rescale ``K`` to diameter one and move its centroid to the origin.

    ``K`` may be a :class:`PointCloud` (the centroid is the point mean) or a
    :class:`ConvexPolygon` (vertex mean; ``spacing`` sets the fill sample).
    """
    if isinstance(K, ConvexPolygon):
        d = K.diameter
        if d <= 0:
            raise DegenerateInput("cannot normalize a single point")
        c = K.center
        poly = ConvexPolygon((K.vertices - c) / d)
        return HomothetyRep(poly.sample(spacing), c, d, poly)
    if not isinstance(K, PointCloud):
        K = PointCloud(K)
    d = diameter(K)
    if d <= 0:
        raise DegenerateInput("cannot normalize a single point")
    c = K.centroid
    return HomothetyRep(K.translated(-c).scaled(1.0 / d), c, d)


class _Objective:
    """Certified upper bound on d_H(K/diam K, target + t) as a function of t."""

    def __init__(self, K: PointCloud, target: HomothetyRep):
        d_lo, d_hi = K.diameter_bounds()
        self.d_lo = d_lo
        c = K.centroid
        self.centre = c
        self.Kn = (K.points - c) / d_lo
        self.hint_K = K.resolution_hint / d_lo
        self.enc = None
        if K.enclosure is not None:
            self.enc = (K.enclosure.vertices - c) / d_lo
        radius = float(np.max(np.hypot(self.Kn[:, 0], self.Kn[:, 1]))) + self.hint_K
        if self.enc is not None:
            radius = min(radius, float(np.max(np.hypot(self.enc[:, 0], self.enc[:, 1]))))
        # true diameter may exceed d_lo; rescaling error is bounded by radius times this
        self.scale_slack = radius * (1.0 - d_lo / d_hi)
        self.poly = target.polygon
        self.T = np.asarray(target.shape.points)
        self.hint_T = target.shape.resolution_hint
        self.tree_K = cKDTree(self.Kn)
        if self.poly is not None:
            self.K_extreme = convex_hull(self.Kn).vertices
        else:
            self.tree_T = cKDTree(self.T)

    def parts(self, t: np.ndarray) -> tuple[float, float]:
        if self.poly is not None:
            raw1 = float(np.max(self.poly.distance(self.K_extreme - t)))
            best1 = (raw1, self.hint_K)
            if self.enc is not None:
                enc1 = float(np.max(self.poly.distance(self.enc - t)))
                if enc1 < raw1 + self.hint_K:
                    best1 = (enc1, 0.0)
        else:
            d, _ = self.tree_T.query(self.Kn - t)
            best1 = (float(np.max(d)), self.hint_K)
        d2, _ = self.tree_K.query(self.T + t)
        raw2 = float(np.max(d2))
        total = max(best1[0] + best1[1], raw2 + self.hint_T) + self.scale_slack
        gap = max(best1[0], raw2)
        return gap, total - gap

    def __call__(self, t: np.ndarray) -> float:
        gap, slack = self.parts(t)
        return gap + slack


def _search(obj: _Objective, r: float) -> tuple[np.ndarray, float]:
    t = np.zeros(2)
    best = obj(t)
    moves = [np.array(m, dtype=float) for m in ((-1, 0), (0, -1), (0, 1), (1, 0))]
    for level in SEARCH_LEVELS:
        step = 1.0 / (level * r)
        for _ in range(_MAX_MOVES):
            cands = [(obj(t + step * m), tuple(t + step * m)) for m in moves]
            val, cand = min(cands)
            if val < best:
                best, t = val, np.array(cand)
            else:
                break
    return t, best


def large_approx_check(K: PointCloud, target: HomothetyRep, r: float) -> LargeApproxWitness:
    """Certify that ``K`` is an ``r``-large approximate of ``target``'s type.

    Only translations of the given representative are searched: centroid
    alignment first, then coordinate descent on grids of step
    ``1/(4r)``, ``1/(10r)`` and ``1/(20r)``. The reported gap is attained at
    the returned translation, so a witness is sound even when the search
    misses the global optimum.

    Raises
    ------
    TooSmall
        if the diameter of ``K`` cannot be certified to exceed ``r``.
    ShapeMismatch
        if the best certified bound is not below ``1/r``.
    """
    if not r > 0:
        raise InvalidInput("r must be positive")
    if not isinstance(K, PointCloud):
        K = PointCloud(K)
    scale = diameter(K)
    if scale <= r:
        raise TooSmall(f"diam(K)={scale:.6g} does not exceed r={r:g}", r=r, scale=scale)
    obj = _Objective(K, target)
    t, _ = _search(obj, r)
    gap, slack = obj.parts(t)
    if not gap + slack < 1.0 / r:
        raise ShapeMismatch(
            f"best gap {gap:.6g} + slack {slack:.3g} is not below 1/r={1.0 / r:.6g}",
            r=r, scale=scale, gap=gap, slack=slack)
    shift = t + obj.centre / obj.d_lo
    return LargeApproxWitness(r, scale, (float(shift[0]), float(shift[1])), gap, slack)


def perturbation_bound(r: float, d0: float) -> float:
    """Largeness ``s`` beyond which a ``d0``-perturbation stays ``r``-large."""
    if not (r > 0 and d0 > 0):
        raise InvalidInput("perturbation_bound needs r > 0 and d0 > 0")
    return 2 * d0 + r + 3 * d0 * r


def linear_map_bound(r: float, A) -> float:
    """Largeness ``s`` beyond which the image under ``A`` stays ``r``-large."""
    if not r > 0:
        raise InvalidInput("linear_map_bound needs r > 0")
    A = np.asarray(A.as_array() if hasattr(A, "as_array") else A, dtype=float)
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if A.shape != (2, 2) or not math.isfinite(det) or det == 0:
        raise InvalidInput("linear_map_bound needs an invertible 2x2 matrix")
    inv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]]) / det
    return r * op_norm(inv) * max(3 * op_norm(A), 1.0)
