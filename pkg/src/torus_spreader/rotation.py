"""Finite-scale estimates of rotation sets and related dynamical diagnostics.

All estimates are computed from sampled iterates of the fundamental domain.
They describe what a finite computation sees and make no claim about limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .dynamics import ConjugatedTranslation, CurveImage, FundamentalDomain, _as_map, apply, power
from .errors import DegenerateNormalization, InvalidInput
from .geom import ConvexPolygon, PointCloud, convex_hull, diameter, hausdorff

__all__ = [
    "RotationEstimate", "GeneralizedRotEstimate", "DeviationProfile", "SpreadingWitness",
    "rotation_set_estimate", "generalized_rot_estimate", "deviation_profile",
    "rigidity_profile", "weak_spreading_probe", "displacement_sup", "domain_images",
]

DEGENERATE_DIAMETER = 1e-9


def _check_n(n, name="n"):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInput(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def domain_images(m, ns: Sequence[int], dom: FundamentalDomain, threads=None) -> Iterator[tuple[int, PointCloud]]:
    """Yield ``(n, f^n(D))`` for increasing ``ns``.

    Conjugated translations jump straight to the requested power; other maps
    are iterated one step at a time.
    """
    m = _as_map(m)
    if isinstance(m, ConjugatedTranslation):
        for n in ns:
            yield n, m.power(n).push(dom.cloud, threads)
        return
    cur, k = dom.cloud, 0
    for n in ns:
        while k < n:
            cur = m.push(cur, threads)
            k += 1
        yield n, cur


def _increasing(seq, name) -> list[int]:
    seq = [_check_n(n, name) for n in seq]
    if not seq or any(b <= a for a, b in zip(seq, seq[1:])):
        raise InvalidInput(f"{name} must be a non-empty strictly increasing list")
    return seq


# ---------------------------------------------------------------------------
# rotation sets

@dataclass(frozen=True, eq=False)
class RotationEstimate:
    """Convex hull of ``f^n(D)/n``; ``resolution`` is the cloud hint scaled by ``1/n``."""

    n: int
    hull: ConvexPolygon
    diameter: float
    resolution: float


def rotation_set_estimate(m, n: int, dom: FundamentalDomain, threads=None) -> RotationEstimate:
    n = _check_n(n)
    _, cloud = next(domain_images(m, [n], dom, threads))
    hull = convex_hull(cloud.points / n)
    return RotationEstimate(n, hull, hull.diameter, cloud.resolution_hint / n)


@dataclass(frozen=True, eq=False)
class GeneralizedRotEstimate:
    """Normalised clouds ``(f^n(D) - f^n(x0)) / diam f^n(D)`` along a subsequence."""

    subsequence: list
    clouds: list
    diam_trace: list
    cauchy_gap: float

    @property
    def diam_growth(self) -> float:
        return self.diam_trace[-1] / self.diam_trace[0]

    @property
    def diverging(self) -> bool:
        """Diameters strictly increase along the subsequence (a finite proxy only)."""
        d = self.diam_trace
        return len(d) > 1 and all(b > a * (1 + 1e-9) for a, b in zip(d, d[1:]))


def generalized_rot_estimate(m, subsequence, dom: FundamentalDomain, threads=None) -> GeneralizedRotEstimate:
    seq = _increasing(subsequence, "subsequence")
    clouds, diams = [], []
    for n, cloud in domain_images(m, seq, dom, threads):
        d = diameter(cloud)
        if d < DEGENERATE_DIAMETER:
            raise DegenerateNormalization(f"diam f^{n}(D) = {d:.3g} is too small to normalise")
        anchor = cloud.points[dom.base_index]
        clouds.append(cloud.translated(-anchor).scaled(1.0 / d))
        diams.append(d)
    tail = clouds[-3:]
    gap = max((hausdorff(a, b) for a, b in combinations(tail, 2)), default=0.0)
    return GeneralizedRotEstimate(seq, clouds, diams, gap)


# ---------------------------------------------------------------------------
# deviation and rigidity

@dataclass(frozen=True)
class DeviationProfile:
    direction: tuple
    rho: tuple
    deviations: list


def deviation_profile(m, v, rho, N: int, dom: FundamentalDomain, threads=None) -> DeviationProfile:
    """``max_x |<f^n(x) - x - n rho, v>|`` over the sampled domain, for ``n = 1..N``."""
    N = _check_n(N, "N")
    v = np.asarray(v, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if v.shape != (2,) or not np.any(v):
        raise InvalidInput("deviation direction must be a non-zero vector")
    m = _as_map(m)
    X = dom.cloud.points
    cur = X
    out = []
    for n in range(1, N + 1):
        cur = apply(m, cur, threads=threads)
        out.append(float(np.max(np.abs((cur - X - n * rho) @ v))))
    return DeviationProfile(tuple(v.tolist()), tuple(rho.tolist()), out)


def rigidity_profile(m, N: int, dom: FundamentalDomain, threads=None) -> list[float]:
    """Largest flat-torus distance between ``f^n(x)`` and ``x``, for ``n = 1..N``."""
    N = _check_n(N, "N")
    m = _as_map(m)
    X = dom.cloud.points
    cur = X
    out = []
    for _ in range(N):
        cur = apply(m, cur, threads=threads)
        d = cur - X
        d -= np.round(d)
        out.append(float(np.max(np.hypot(d[:, 0], d[:, 1]))))
    return out


def displacement_sup(m, resolution: int = 201) -> float:
    """Sampled ``sup |h(x) - x|``; for a Z^2-equivariant map one square suffices."""
    s = np.linspace(0.0, 1.0, resolution)
    gx, gy = np.meshgrid(s, s, indexing="ij")
    P = np.column_stack([gx.ravel(), gy.ravel()])
    d = apply(_as_map(m), P) - P
    return float(np.max(np.hypot(d[:, 0], d[:, 1])))


# ---------------------------------------------------------------------------
# weak spreading

@dataclass(frozen=True)
class SpreadingWitness:
    n: int
    center: tuple
    density: float


def _disk_sample(R: float, spacing: float) -> tuple[np.ndarray, float]:
    xs = np.arange(-R, R + spacing, spacing)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    grid = grid[np.hypot(grid[:, 0], grid[:, 1]) <= R]
    k = max(8, int(math.ceil(2 * math.pi * R / spacing)))
    ang = np.linspace(0.0, 2 * math.pi, k, endpoint=False)
    rim = R * np.column_stack([np.cos(ang), np.sin(ang)])
    # grid corners cover within spacing/sqrt(2); near the rim the chord step adds spacing/2
    return np.vstack([grid, rim]), spacing * (1 / math.sqrt(2) + 0.5)


def _chords(poly: ConvexPolygon, spacing: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """Horizontal and vertical chords of a polygon, ``spacing`` apart."""
    V = poly.vertices
    starts, ends = poly.edges()
    out = []
    for axis in (0, 1):
        other = 1 - axis
        lo, hi = V[:, other].min(), V[:, other].max()
        for c in np.arange(lo + spacing / 2, hi, spacing):
            hits = []
            for s_, e_ in zip(starts, ends):
                a, b = s_[other], e_[other]
                if a != b and min(a, b) <= c <= max(a, b):
                    hits.append(s_[axis] + (c - a) / (b - a) * (e_[axis] - s_[axis]))
            if len(hits) >= 2 and max(hits) > min(hits):
                p0, p1 = np.empty(2), np.empty(2)
                p0[axis], p1[axis] = min(hits), max(hits)
                p0[other] = p1[other] = c
                out.append((p0, p1))
    return out


def weak_spreading_probe(m, U, eps: float, R: float, N: int, *, chord_spacing: float | None = None,
                         curve_cap: int = 200_000, threads=None) -> SpreadingWitness | None:
    """First ``n <= N`` and a ball of radius ``R`` in which ``f^n(U)`` is ``eps``-dense.

    ``U`` is a point cloud, whose points are simply mapped, or a convex
    polygon, which is represented by horizontal and vertical chords whose
    images are sampled adaptively (spacing ``eps/4``).

    Candidate centres form a grid of step ``min(R, eps)/2`` over the bounding
    box of the image, scanned in lexicographic order. Density is certified on a
    disk sample whose covering radius is subtracted from ``eps``. ``None``
    means nothing was found up to ``N``; it is not a proof that no ball exists.
    """
    if not (eps > 0 and R > 0):
        raise InvalidInput("eps and R must be positive")
    N = _check_n(N, "N")
    m = _as_map(m)
    disk, cover = _disk_sample(R, eps / 8)
    coarse, _ = _disk_sample(R, eps / 2)
    step = min(R, eps) / 2
    if isinstance(U, ConvexPolygon):
        spacing = chord_spacing or eps / 4
        curves = [CurveImage(p0, p1, 33) for p0, p1 in _chords(U, spacing)]
        if not curves:
            curves = [CurveImage(U.vertices[0], U.vertices[-1], 2)]
    else:
        curves = None
        cur = U.points
    for n in range(1, N + 1):
        if curves is None:
            cur = apply(m, cur, threads=threads)
        else:
            fn = power(m, n)
            cur = np.vstack([c.refine(fn, eps / 4, curve_cap, threads) for c in curves])
        tree = cKDTree(cur)
        lo, hi = cur.min(axis=0), cur.max(axis=0)
        xs = np.arange(lo[0], hi[0] + step, step)
        ys = np.arange(lo[1], hi[1] + step, step)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        centers = np.column_stack([gx.ravel(), gy.ravel()])
        # cheap necessary conditions first: the centre, then a coarse disk
        d0, _ = tree.query(centers)
        centers = centers[d0 <= eps - cover]
        for i in range(0, len(centers), 256):
            blk = centers[i:i + 256]
            d, _ = tree.query((blk[:, None, :] + coarse[None, :, :]).reshape(-1, 2))
            ok = blk[np.max(d.reshape(len(blk), -1), axis=1) <= eps]
            for c in ok:
                d, _ = tree.query(disk + c)
                worst = float(np.max(d))
                if worst + cover <= eps:
                    return SpreadingWitness(n, (float(c[0]), float(c[1])), worst + cover)
    return None
