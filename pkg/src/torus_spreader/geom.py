"""Planar geometry and integer linear algebra.

Real points are numpy arrays of shape ``(2,)`` or ``(n, 2)``. Rational
vectors are pairs of :class:`fractions.Fraction`. Point clouds stand in for
compact sets; each one records how well it represents the set it samples:

``resolution_hint``
    upper bound on the distance from any point of the sampled compact set
    to the nearest cloud point (0 when the cloud *is* the set).
``enclosure``
    optional convex polygon known to contain the sampled compact set.

Cloud points are always assumed to lie in the sampled set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import InvalidInput

__all__ = [
    "Mat2Z", "PointCloud", "Segment", "ConvexPolygon",
    "to_fraction", "rational_pair", "convex_hull", "minkowski_zonogon",
    "stretch", "hausdorff", "directed_hausdorff", "diameter", "eps_dense",
    "op_norm", "angular_distance", "line_distance", "primitive_completion",
    "segment_distances", "unit_square",
]

# covering radius of a filled-polygon sample with grid spacing h, in units of h:
# a grid corner is within h/sqrt(2); if it falls outside, the boundary crossing
# is within h/sqrt(2) and a boundary sample within h/2 of that.
_FILL_COVER = 1.0 / math.sqrt(2.0) + 0.5


def to_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, ``[num, den]`` pair or ``"p/q"``."""
    if isinstance(x, bool):
        raise InvalidInput(f"not a rational: {x!r}")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        num, den = x
        if isinstance(num, int) and isinstance(den, int) and den != 0:
            return Fraction(num, den)
    if isinstance(x, float) and math.isfinite(x):
        return Fraction(x)
    raise InvalidInput(f"not a rational: {x!r}")


def rational_pair(v) -> tuple[Fraction, Fraction]:
    if len(v) != 2:
        raise InvalidInput(f"expected a pair, got {v!r}")
    return (to_fraction(v[0]), to_fraction(v[1]))


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInput(f"expected points of shape (n, 2), got {arr.shape}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# integer matrices

@dataclass(frozen=True)
class Mat2Z:
    """Integer 2x2 matrix ``[[a, b], [c, d]]`` with determinant +-1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            if not isinstance(getattr(self, name), int):
                raise InvalidInput(f"Mat2Z entry {name} must be an int")
        if self.det not in (1, -1):
            raise InvalidInput(f"Mat2Z must be unimodular, det={self.det}")

    @classmethod
    def identity(cls) -> "Mat2Z":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_rows(cls, rows) -> "Mat2Z":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def is_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)

    def inverse(self) -> "Mat2Z":
        s = self.det
        return Mat2Z(s * self.d, -s * self.b, -s * self.c, s * self.a)

    def __matmul__(self, other: "Mat2Z") -> "Mat2Z":
        return Mat2Z(self.a * other.a + self.b * other.c,
                     self.a * other.b + self.b * other.d,
                     self.c * other.a + self.d * other.c,
                     self.c * other.b + self.d * other.d)

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def as_array(self) -> np.ndarray:
        return np.array(self.rows(), dtype=float)

    def apply_exact(self, v) -> tuple[Fraction, Fraction]:
        x, y = rational_pair(v)
        return (self.a * x + self.b * y, self.c * x + self.d * y)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b) >= 0``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def primitive_completion(w) -> Mat2Z:
    """SL(2, Z) matrix whose second column is the primitive vector ``w``.

    Among all completions the one with the smallest first column, compared
    lexicographically in absolute value, is returned.
    """
    if len(w) != 2 or not all(isinstance(c, (int, np.integer)) for c in w):
        raise InvalidInput(f"primitive_completion needs an integer pair, got {w!r}")
    w1, w2 = int(w[0]), int(w[1])
    g, s, t = _egcd(w2, w1)
    if g != 1:
        raise InvalidInput(f"{(w1, w2)} is not primitive (gcd={g})")
    # first columns are (s + k*w1, -t + k*w2); key grows away from the centres
    centres = []
    if w1:
        centres.append(round(-s / w1))
    if w2:
        centres.append(round(t / w2))
    ks = {c + d for c in centres for d in range(-2, 3)}

    def key(k):
        a, c = s + k * w1, -t + k * w2
        return (abs(a), abs(c), a, c)

    k = min(ks, key=key)
    return Mat2Z(s + k * w1, w1, -t + k * w2, w2)


# ---------------------------------------------------------------------------
# real linear algebra

def op_norm(M) -> float:
    """Largest singular value of a 2x2 matrix, from the eigenvalues of M^T M."""
    if isinstance(M, Mat2Z):
        M = M.as_array()
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2) or not np.all(np.isfinite(M)):
        raise InvalidInput("op_norm expects a finite 2x2 matrix")
    (a, b), (c, d) = M
    # trace and determinant of M^T M
    tr = a * a + b * b + c * c + d * d
    det = (a * d - b * c) ** 2
    disc = math.sqrt(max(tr * tr / 4.0 - det, 0.0))
    return math.sqrt(tr / 2.0 + disc)


def angular_distance(u, v) -> float:
    """Arc length on the unit circle between the directions of ``u`` and ``v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.any(u) and np.any(v)):
        raise InvalidInput("angular_distance of a zero vector")
    cross = u[0] * v[1] - u[1] * v[0]
    dot = u[0] * v[0] + u[1] * v[1]
    return math.atan2(abs(cross), dot)


def line_distance(u, v) -> float:
    """Angular distance between the unoriented lines spanned by ``u`` and ``v``.

    Segments have no preferred orientation, so separation between segment
    directions is measured here, in ``[0, pi/2]``.
    """
    theta = angular_distance(u, v)
    return min(theta, math.pi - theta)


# ---------------------------------------------------------------------------
# segments

@dataclass(frozen=True)
class Segment:
    p: tuple[float, float]
    q: tuple[float, float]

    def __post_init__(self):
        p = tuple(float(c) for c in self.p)
        q = tuple(float(c) for c in self.q)
        if p == q:
            raise InvalidInput("segment endpoints coincide")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def length(self) -> float:
        return math.hypot(self.q[0] - self.p[0], self.q[1] - self.p[1])

    @property
    def direction(self) -> np.ndarray:
        return np.subtract(self.q, self.p)

    @property
    def slope(self) -> float:
        dx = self.q[0] - self.p[0]
        dy = self.q[1] - self.p[1]
        return math.inf if dx == 0 else dy / dx

    def sample(self, spacing: float) -> np.ndarray:
        n = max(2, int(math.ceil(self.length / spacing)) + 1)
        s = np.linspace(0.0, 1.0, n)[:, None]
        return np.asarray(self.p) * (1 - s) + np.asarray(self.q) * s


def segment_distances(points, starts, ends, chunk: int = 2_000_000) -> np.ndarray:
    """Distance from each point to the nearest of the segments ``[starts, ends]``."""
    P = _as_points(points)
    S = _as_points(starts)
    E = _as_points(ends)
    D = E - S
    L2 = np.einsum("ij,ij->i", D, D)
    L2 = np.where(L2 == 0.0, 1.0, L2)
    out = np.empty(len(P))
    step = max(1, chunk // max(1, len(S)))
    for i in range(0, len(P), step):
        blk = P[i:i + step]
        rel = blk[:, None, :] - S[None, :, :]
        t = np.clip(np.einsum("ijk,jk->ij", rel, D) / L2, 0.0, 1.0)
        diff = rel - t[:, :, None] * D[None, :, :]
        out[i:i + step] = np.sqrt(np.min(np.einsum("ijk,ijk->ij", diff, diff), axis=1))
    return out


# ---------------------------------------------------------------------------
# convex polygons

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(points: Sequence) -> list:
    """Andrew's monotone chain; works on floats and Fractions alike.

    Returns the hull vertices counterclockwise with collinear points dropped.
    """
    pts = sorted(set(map(tuple, points)))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull if len(hull) >= 2 else pts[:1]


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Filled convex polygon with counterclockwise vertices.

    One vertex means a point and two mean a segment; both are flagged
    ``degenerate``. ``exact`` optionally holds the same vertices as Fractions.
    """

    vertices: np.ndarray
    exact: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(_as_points(self.vertices)))

    @property
    def degenerate(self) -> bool:
        return len(self.vertices) <= 2

    @property
    def is_point(self) -> bool:
        return len(self.vertices) == 1

    @property
    def symmetric(self) -> bool:
        """Point-symmetric about the vertex centroid (up to 1e-12 relative)."""
        c = self.vertices.mean(axis=0)
        refl = 2 * c - self.vertices
        scale = max(1.0, float(np.abs(self.vertices).max()))
        return directed_hausdorff(refl, self.vertices) <= 1e-12 * scale

    @property
    def center(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @property
    def diameter(self) -> float:
        return _pairwise_max(self.vertices)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        if len(v) == 2:
            return v[:1], v[1:]
        return v, np.roll(v, -1, axis=0)

    def area(self) -> float:
        if self.degenerate:
            return 0.0
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from each point to the filled polygon."""
        P = _as_points(points)
        v = self.vertices
        if len(v) == 1:
            return np.hypot(P[:, 0] - v[0, 0], P[:, 1] - v[0, 1])
        starts, ends = self.edges()
        d = segment_distances(P, starts, ends)
        if len(v) >= 3:
            e = ends - starts
            rel = P[:, None, :] - starts[None, :, :]
            cr = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
            inside = np.all(cr >= 0.0, axis=1)
            d[inside] = 0.0
        return d

    def translated(self, t) -> "ConvexPolygon":
        t = np.asarray(t, dtype=float)
        return ConvexPolygon(self.vertices + t)

    def scaled(self, c: float) -> "ConvexPolygon":
        if c <= 0:
            raise InvalidInput("scale factor must be positive")
        return ConvexPolygon(self.vertices * c)

    def transformed(self, M) -> "ConvexPolygon":
        M = M.as_array() if isinstance(M, Mat2Z) else np.asarray(M, dtype=float)
        return convex_hull(self.vertices @ M.T)

    def stretched(self, w) -> "ConvexPolygon":
        """Minkowski sum with the segment ``[-w, w]``."""
        w = np.asarray(w, dtype=float)
        if not np.any(w):
            return self
        return convex_hull(np.vstack([self.vertices + w, self.vertices - w]))

    def sample(self, spacing: float) -> "PointCloud":
        """Filled sample: interior grid, boundary points and vertices."""
        if spacing <= 0:
            raise InvalidInput("spacing must be positive")
        v = self.vertices
        if len(v) == 1:
            return PointCloud(v, 0.0, self)
        starts, ends = self.edges()
        parts = [v]
        for s, e in zip(starts, ends):
            parts.append(Segment(s, e).sample(spacing))
        if len(v) >= 3:
            lo, hi = v.min(axis=0), v.max(axis=0)
            xs = np.arange(lo[0], hi[0] + spacing, spacing)
            ys = np.arange(lo[1], hi[1] + spacing, spacing)
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            grid = np.column_stack([gx.ravel(), gy.ravel()])
            parts.append(grid[self.distance(grid) == 0.0])
            hint = _FILL_COVER * spacing
        else:
            hint = 0.5 * spacing
        return PointCloud(np.vstack(parts), hint, self)

    def boundary_sample(self, spacing: float) -> np.ndarray:
        v = self.vertices
        if len(v) == 1:
            return v.copy()
        starts, ends = self.edges()
        return np.vstack([Segment(s, e).sample(spacing) for s, e in zip(starts, ends)])


def convex_hull(points) -> ConvexPolygon:
    """Convex hull of a float point set, robust to collinear input."""
    P = _as_points(points)
    if len(P) == 0:
        raise InvalidInput("convex hull of an empty set")
    if len(P) > 64:
        try:
            hull = ConvexHull(P)
            # qhull returns 2-d hull vertices counterclockwise
            return ConvexPolygon(P[hull.vertices])
        except QhullError:
            pass
        # collinear or coincident: keep the two extreme points along the spread
        c = P.mean(axis=0)
        u, s, vt = np.linalg.svd(P - c, full_matrices=False)
        proj = (P - c) @ vt[0]
        lo, hi = P[np.argmin(proj)], P[np.argmax(proj)]
        return ConvexPolygon(lo[None, :] if np.array_equal(lo, hi) else np.vstack([lo, hi]))
    hull = _monotone_chain([tuple(p) for p in P.tolist()])
    return ConvexPolygon(np.array(hull, dtype=float))


def _upper_half(v):
    x, y = v
    if y < 0 or (y == 0 and x < 0):
        return (-x, -y)
    return (x, y)


def minkowski_zonogon(generators: Iterable) -> ConvexPolygon:
    """The zonogon ``[-v1, v1] + ... + [-vl, vl]``, computed exactly.

    Generators are folded into the upper half-plane, parallel ones merged,
    sorted by angle, and the boundary is traced by partial sums starting at
    the lowest vertex.
    """
    gens = [rational_pair(g) for g in generators]
    if not gens:
        raise InvalidInput("zonogon needs at least one generator")
    if any(g == (0, 0) for g in gens):
        raise InvalidInput("zero generator")
    merged: list[tuple[Fraction, Fraction]] = []
    for g in map(_upper_half, gens):
        for i, h in enumerate(merged):
            if h[0] * g[1] - h[1] * g[0] == 0:
                merged[i] = (h[0] + g[0], h[1] + g[1])
                break
        else:
            merged.append(g)

    def by_angle(u, v):
        c = u[0] * v[1] - u[1] * v[0]
        return -1 if c > 0 else (1 if c < 0 else 0)

    merged.sort(key=cmp_to_key(by_angle))
    start = (-sum(g[0] for g in merged), -sum(g[1] for g in merged))
    verts = [start]
    cur = start
    for g in merged + [(-g[0], -g[1]) for g in merged[:-1]]:
        cur = (cur[0] + 2 * g[0], cur[1] + 2 * g[1])
        verts.append(cur)
    if len(merged) == 1:
        verts = verts[:2]
    return ConvexPolygon(np.array([[float(x), float(y)] for x, y in verts]), tuple(verts))


def unit_square() -> ConvexPolygon:
    return ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# point clouds

@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    resolution_hint: float = 0.0
    enclosure: ConvexPolygon | None = field(default=None)

    def __post_init__(self):
        pts = _as_points(self.points)
        if len(pts) == 0:
            raise InvalidInput("point cloud must be non-empty")
        if not np.all(np.isfinite(pts)):
            raise InvalidInput("point cloud contains non-finite coordinates")
        if not self.resolution_hint >= 0:
            raise InvalidInput("resolution_hint must be >= 0")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "resolution_hint", float(self.resolution_hint))

    def __len__(self):
        return len(self.points)

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def translated(self, t) -> "PointCloud":
        t = np.asarray(t, dtype=float)
        enc = self.enclosure.translated(t) if self.enclosure is not None else None
        return PointCloud(self.points + t, self.resolution_hint, enc)

    def scaled(self, c: float) -> "PointCloud":
        enc = self.enclosure.scaled(c) if self.enclosure is not None else None
        return PointCloud(self.points * c, self.resolution_hint * c, enc)

    def transformed(self, M) -> "PointCloud":
        M = M.as_array() if isinstance(M, Mat2Z) else np.asarray(M, dtype=float)
        enc = self.enclosure.transformed(M) if self.enclosure is not None else None
        return PointCloud(self.points @ M.T, self.resolution_hint * op_norm(M), enc)

    def diameter_bounds(self) -> tuple[float, float]:
        """Lower and upper bounds on the diameter of the sampled set."""
        lo = diameter(self)
        hi = lo + 2.0 * self.resolution_hint
        if self.enclosure is not None:
            hi = min(hi, self.enclosure.diameter)
        return lo, max(lo, hi)


def _pairwise_max(P: np.ndarray) -> float:
    if len(P) < 2:
        return 0.0
    diff = P[:, None, :] - P[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))


def diameter(A) -> float:
    """Largest pairwise distance among the cloud points."""
    P = A.points if isinstance(A, PointCloud) else _as_points(A)
    if len(P) == 0:
        raise InvalidInput("diameter of an empty set")
    if len(P) > 64:
        P = convex_hull(P).vertices
    return _pairwise_max(P)


def stretch(X: PointCloud, v, samples_per_unit: int) -> PointCloud:
    """Sample of ``X + [-v, v]``: every point swept along the segment."""
    v = np.asarray(v, dtype=float)
    if v.shape != (2,) or not np.any(v):
        raise InvalidInput("stretch direction must be a non-zero vector")
    if samples_per_unit < 1:
        raise InvalidInput("samples_per_unit must be positive")
    length = 2.0 * math.hypot(*v)
    n = max(2, int(math.ceil(length * samples_per_unit)) + 1)
    s = np.linspace(-1.0, 1.0, n)
    pts = (X.points[:, None, :] + s[None, :, None] * v[None, None, :]).reshape(-1, 2)
    hint = X.resolution_hint + 0.5 * length / (n - 1)
    enc = X.enclosure.stretched(v) if X.enclosure is not None else None
    return PointCloud(pts, hint, enc)


def _points_of(A) -> np.ndarray:
    P = A.points if isinstance(A, PointCloud) else _as_points(A)
    if len(P) == 0:
        raise InvalidInput("empty point set")
    return P


def directed_hausdorff(A, B) -> float:
    """``sup_{a in A} d(a, B)`` via a KD-tree on ``B``."""
    P, Q = _points_of(A), _points_of(B)
    d, _ = cKDTree(Q).query(P)
    return float(np.max(d))


def hausdorff(A, B) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def eps_dense(X, Y, eps: float) -> bool:
    """True iff every point of ``Y`` lies within ``eps`` of some point of ``X``."""
    if not eps > 0:
        raise InvalidInput("eps must be positive")
    return directed_hausdorff(Y, X) <= eps
