"""Lifted torus maps as symbolic words of translations, linear maps and shears.

Every map object exposes the same small protocol:

``map(P)``            image of an ``(n, 2)`` array (or a single point)
``map.inverse()``     the inverse map
``map.lipschitz()``   an upper bound on the Lipschitz constant
``map.enclose(E)``    a convex polygon containing the image of the polygon ``E``
``map.exact(p)``      image of a pair of Fractions in exact arithmetic

Words are applied right to left: ``LiftWord((g1, g2))`` is ``g1 o g2``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Sequence

import numpy as np

from .errors import ConstructionError, InvalidInput
from .geom import ConvexPolygon, Mat2Z, PointCloud, op_norm, unit_square

__all__ = [
    "phi", "apply_exact", "Translation", "Linear", "Shear", "LiftWord", "RescaledLift",
    "ConjugatedTranslation", "FundamentalDomain", "apply", "push", "compose",
    "inverse", "iterate_domain", "cq_conjugate", "equivariance_check",
    "identity", "threads_from_env", "CurveImage", "power",
]

PHI_MAX_ARG = 2.0 ** 40
THREADS_ENV = "TORUS_SPREADER_THREADS"
_CHUNK = 65536
DYADIC = 2.0 ** 40  # sample grid of equivariance_check


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInput(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise InvalidInput(f"{THREADS_ENV} must be >= 1")
    return n


# ---------------------------------------------------------------------------
# triangle wave

def _check_xi(xi) -> int:
    if isinstance(xi, bool) or not isinstance(xi, (int, np.integer)) or xi < 1:
        raise InvalidInput(f"xi must be a positive integer, got {xi!r}")
    return int(xi)


def phi(xi: int, x):
    """Triangle wave of period ``1/xi``, equal to 1 at the integers.

    On ``[z/(2 xi), (z+1)/(2 xi))`` it is ``(-1)^(z+1) (4 xi x - 2z - 1)``.
    The argument is reduced modulo 1 and then to its half-period index ``z``
    and offset before evaluating, so breakpoints are hit exactly. Rational scalars are evaluated
    exactly and return a Fraction.
    """
    xi = _check_xi(xi)
    if isinstance(x, Rational) and not isinstance(x, bool):
        u = 2 * xi * Fraction(x)
        if abs(x) > PHI_MAX_ARG:
            raise InvalidInput("phi argument out of range")
        z = math.floor(u)
        val = 2 * (u - z) - 1
        return val if z % 2 else -val
    if np.ndim(x) == 0:
        x = float(x)
        if not abs(x) <= PHI_MAX_ARG:
            raise InvalidInput("phi argument must satisfy |x| <= 2^40")
        u = (2 * xi) * (x - math.floor(x))
        z = math.floor(u)
        val = 2.0 * (u - z) - 1.0
        return val if z % 2 else -val
    arr = np.asarray(x, dtype=float)
    if not np.all(np.abs(arr) <= PHI_MAX_ARG):
        raise InvalidInput("phi argument must satisfy |x| <= 2^40")
    # period 1: reduce first so x and x + n give bitwise equal values
    u = (2 * xi) * (arr - np.floor(arr))
    z = np.floor(u)
    val = 2.0 * (u - z) - 1.0
    out = np.where(np.mod(z, 2.0) == 1.0, val, -val)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# generators

def _points(P) -> tuple[np.ndarray, bool]:
    arr = np.asarray(P, dtype=float)
    single = arr.ndim == 1
    arr = arr.reshape(-1, 2)
    return arr, single


@dataclass(frozen=True)
class Translation:
    theta: tuple

    def __post_init__(self):
        th = tuple(self.theta)
        if len(th) != 2 or not all(isinstance(c, Real) and math.isfinite(c) for c in th):
            raise InvalidInput(f"translation vector must be two finite reals, got {self.theta!r}")
        object.__setattr__(self, "theta", th)

    @property
    def vector(self) -> np.ndarray:
        return np.array([float(self.theta[0]), float(self.theta[1])])

    @property
    def is_identity(self) -> bool:
        return self.theta[0] == 0 and self.theta[1] == 0

    def __call__(self, P):
        return np.asarray(P, dtype=float) + self.vector

    def exact(self, p):
        return (p[0] + Fraction(self.theta[0]), p[1] + Fraction(self.theta[1]))

    def inverse(self) -> "Translation":
        return Translation((-self.theta[0], -self.theta[1]))

    def lipschitz(self) -> float:
        return 1.0

    def enclose(self, E: ConvexPolygon) -> ConvexPolygon:
        return E.translated(self.vector)


@dataclass(frozen=True)
class Linear:
    A: Mat2Z

    def __post_init__(self):
        if not isinstance(self.A, Mat2Z):
            object.__setattr__(self, "A", Mat2Z.from_rows(self.A))

    @property
    def is_identity(self) -> bool:
        return self.A.is_identity

    def __call__(self, P):
        return np.asarray(P, dtype=float) @ self.A.as_array().T

    def exact(self, p):
        return self.A.apply_exact(p)

    def inverse(self) -> "Linear":
        return Linear(self.A.inverse())

    def lipschitz(self) -> float:
        return op_norm(self.A)

    def enclose(self, E: ConvexPolygon) -> ConvexPolygon:
        return E.transformed(self.A)


@dataclass(frozen=True)
class Shear:
    """``(x, y) -> (x, y + eta * phi_xi(x))``."""

    eta: Real
    xi: int

    def __post_init__(self):
        _check_xi(self.xi)
        object.__setattr__(self, "xi", int(self.xi))
        if not isinstance(self.eta, Real) or not math.isfinite(self.eta) or self.eta == 0:
            raise InvalidInput(f"shear amount must be a non-zero real, got {self.eta!r}")

    @property
    def is_identity(self) -> bool:
        return False

    def __call__(self, P):
        P = np.array(P, dtype=float)
        P[..., 1] += float(self.eta) * phi(self.xi, P[..., 0])
        return P

    def exact(self, p):
        return (p[0], p[1] + Fraction(self.eta) * phi(self.xi, p[0]))

    def inverse(self) -> "Shear":
        return Shear(-self.eta, self.xi)

    def lipschitz(self) -> float:
        return op_norm([[1.0, 0.0], [4.0 * abs(float(self.eta)) * self.xi, 1.0]])

    def enclose(self, E: ConvexPolygon) -> ConvexPolygon:
        return E.stretched((0.0, float(self.eta)))


Generator = (Translation, Linear, Shear)


def _merge(g, h):
    """Peephole merge of ``g o h``; returns a generator, None (identity) or NotImplemented."""
    if isinstance(g, Shear) and isinstance(h, Shear) and g.xi == h.xi:
        eta = g.eta + h.eta
        return None if eta == 0 else Shear(eta, g.xi)
    if isinstance(g, Translation) and isinstance(h, Translation):
        t = Translation((g.theta[0] + h.theta[0], g.theta[1] + h.theta[1]))
        return None if t.is_identity else t
    if isinstance(g, Linear) and isinstance(h, Linear):
        m = Linear(g.A @ h.A)
        return None if m.is_identity else m
    return NotImplemented


def _simplify(gens: Sequence) -> tuple:
    out: list = []
    for g in gens:
        if g.is_identity:
            continue
        while out:
            merged = _merge(out[-1], g)
            if merged is NotImplemented:
                break
            out.pop()
            g = merged
            if g is None:
                break
        if g is not None:
            out.append(g)
    return tuple(out)


# ---------------------------------------------------------------------------
# maps

class _MapBase:
    def push(self, cloud: PointCloud, threads: int | None = None) -> PointCloud:
        """Image of a cloud: points mapped, hint scaled, enclosure propagated."""
        pts = apply(self, cloud.points, threads=threads)
        enc = self.enclose(cloud.enclosure) if cloud.enclosure is not None else None
        return PointCloud(pts, cloud.resolution_hint * self.lipschitz(), enc)


@dataclass(frozen=True)
class LiftWord(_MapBase):
    gens: tuple = ()

    def __post_init__(self):
        gens = tuple(self.gens)
        for g in gens:
            if not isinstance(g, Generator):
                raise InvalidInput(f"not a generator: {g!r}")
        object.__setattr__(self, "gens", gens)

    @classmethod
    def of(cls, *gens) -> "LiftWord":
        return cls(gens)

    def __len__(self):
        return len(self.gens)

    @property
    def is_identity(self) -> bool:
        return not self.gens

    def __call__(self, P):
        P = np.array(P, dtype=float)
        for g in reversed(self.gens):
            P = g(P)
        return P

    def inverse(self) -> "LiftWord":
        return LiftWord(tuple(g.inverse() for g in reversed(self.gens)))

    def exact(self, p):
        for g in reversed(self.gens):
            p = g.exact(p)
        return p

    def lipschitz(self) -> float:
        return math.prod(g.lipschitz() for g in self.gens)

    def enclose(self, E: ConvexPolygon) -> ConvexPolygon:
        for g in reversed(self.gens):
            E = g.enclose(E)
        return E

    def simplified(self) -> "LiftWord":
        return LiftWord(_simplify(self.gens))

    def shears(self) -> list[Shear]:
        return [g for g in self.gens if isinstance(g, Shear)]


def identity() -> LiftWord:
    return LiftWord(())


def _C(q):
    return np.array([[1.0 / q, 0.0], [0.0, 1.0]])


def _C_inv(q):
    return np.array([[float(q), 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class RescaledLift(_MapBase):
    """``C_q o base o C_q^-1`` with ``C_q = diag(1/q, 1)``."""

    base: object
    q: int

    def __post_init__(self):
        if isinstance(self.q, bool) or not isinstance(self.q, (int, np.integer)) or self.q < 1:
            raise InvalidInput(f"q must be a positive integer, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))

    def __call__(self, P):
        P = np.array(P, dtype=float)
        P[..., 0] *= self.q
        P = self.base(P)
        P[..., 0] /= self.q
        return P

    def exact(self, p):
        x, y = self.base.exact((p[0] * self.q, p[1]))
        return (x / self.q, y)

    def inverse(self) -> "RescaledLift":
        return RescaledLift(self.base.inverse(), self.q)

    def lipschitz(self) -> float:
        return self.base.lipschitz() * self.q

    def enclose(self, E: ConvexPolygon) -> ConvexPolygon:
        E = E.transformed(_C_inv(self.q))
        return self.base.enclose(E).transformed(_C(self.q))


@dataclass(frozen=True)
class ConjugatedTranslation(_MapBase):
    """``h o R_theta o h^-1``; powers only rescale ``theta``."""

    h: object
    theta: tuple

    def __post_init__(self):
        object.__setattr__(self, "theta", Translation(self.theta).theta)

    @property
    def _h_inv(self):
        return self.h.inverse()

    def __call__(self, P):
        return self.h(Translation(self.theta)(self._h_inv(P)))

    def exact(self, p):
        return self.h.exact(Translation(self.theta).exact(self._h_inv.exact(p)))

    def inverse(self) -> "ConjugatedTranslation":
        return ConjugatedTranslation(self.h, (-self.theta[0], -self.theta[1]))

    def power(self, n: int) -> "ConjugatedTranslation":
        return ConjugatedTranslation(self.h, (n * self.theta[0], n * self.theta[1]))

    def lipschitz(self) -> float:
        return self.h.lipschitz() * self._h_inv.lipschitz()

    def enclose(self, E: ConvexPolygon) -> ConvexPolygon:
        E = self._h_inv.enclose(E)
        return self.h.enclose(Translation(self.theta).enclose(E))


def _as_map(m):
    if isinstance(m, Generator):
        return LiftWord((m,))
    if isinstance(m, (LiftWord, RescaledLift, ConjugatedTranslation)):
        return m
    raise InvalidInput(f"not a lifted map: {m!r}")


def apply(m, p, threads: int | None = None):
    """Image of a point or an ``(n, 2)`` array under a map or generator.

    With ``threads > 1`` large arrays are split into chunks evaluated
    concurrently; results are concatenated in order, so output is identical.
    """
    m = _as_map(m)
    P, single = _points(p)
    threads = threads or 1
    if threads > 1 and len(P) > _CHUNK:
        chunks = [P[i:i + _CHUNK] for i in range(0, len(P), _CHUNK)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = np.vstack(list(pool.map(m, chunks)))
    else:
        out = m(P)
    return out[0] if single else out


def apply_exact(m, p) -> tuple[Fraction, Fraction]:
    """Image of a rational point in exact arithmetic (float data taken at face value)."""
    return _as_map(m).exact((Fraction(p[0]), Fraction(p[1])))


def power(m, n: int):
    """``m`` composed with itself ``n`` times, as a map of the same kind."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise InvalidInput("power must be a non-negative integer")
    m = _as_map(m)
    if isinstance(m, ConjugatedTranslation):
        return m.power(n)
    if isinstance(m, RescaledLift):
        return RescaledLift(power(m.base, n), m.q)
    return LiftWord(m.gens * n)


def push(m, cloud: PointCloud, threads: int | None = None) -> PointCloud:
    return _as_map(m).push(cloud, threads)


def compose(f, g) -> LiftWord:
    """``f o g`` with adjacent shears (same xi), translations and linears merged."""
    f, g = _as_map(f), _as_map(g)
    if not (isinstance(f, LiftWord) and isinstance(g, LiftWord)):
        raise InvalidInput("compose works on LiftWords and generators")
    return LiftWord(_simplify(f.gens + g.gens))


def inverse(f):
    return _as_map(f).inverse()


class CurveImage:
    """Sample of the image of the segment ``[p0, p1]``, refined adaptively.

    Parameters are bisected wherever consecutive image points are farther
    apart than the requested spacing, so the sample follows the image polyline
    however much the map stretches it. Every sample point lies on the image.
    """

    def __init__(self, p0, p1, n0: int = 257):
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)
        self.t = np.linspace(0.0, 1.0, n0)

    def source(self, t: np.ndarray) -> np.ndarray:
        return self.p0 + t[:, None] * (self.p1 - self.p0)

    def refine(self, m, spacing: float, cap: int, threads=None) -> np.ndarray:
        """Image points under ``m`` with gaps at most ``spacing`` (unless ``cap`` is hit)."""
        pts = apply(m, self.source(self.t), threads=threads)
        for _ in range(64):
            gaps = np.hypot(*np.diff(pts, axis=0).T)
            bad = np.flatnonzero(gaps > spacing)
            room = cap - len(self.t)
            if len(bad) == 0 or room <= 0:
                break
            bad = bad[:room]
            mids = 0.5 * (self.t[bad] + self.t[bad + 1])
            new = apply(m, self.source(mids), threads=threads)
            self.t = np.insert(self.t, bad + 1, mids)
            pts = np.insert(pts, bad + 1, new, axis=0)
        return pts


# ---------------------------------------------------------------------------
# fundamental domains and iteration

@dataclass(frozen=True, eq=False)
class FundamentalDomain:
    """``N x N`` boundary-inclusive grid on ``[0, 1]^2`` plus a basepoint.

    The cloud covers the square within ``h/sqrt(2)`` (``h = 1/(N-1)``) and
    carries the square itself as enclosure. The basepoint is appended when it
    is not a grid node; ``base_index`` locates it.
    """

    resolution: int
    basepoint: tuple = (0.5, 0.5)

    def __post_init__(self):
        if isinstance(self.resolution, bool) or not isinstance(self.resolution, int) or self.resolution < 2:
            raise InvalidInput("resolution must be an integer >= 2")
        bp = tuple(float(c) for c in self.basepoint)
        if len(bp) != 2 or not all(0.0 <= c <= 1.0 for c in bp):
            raise InvalidInput("basepoint must lie in [0, 1]^2")
        object.__setattr__(self, "basepoint", bp)
        s = np.linspace(0.0, 1.0, self.resolution)
        gx, gy = np.meshgrid(s, s, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        hits = np.flatnonzero((pts[:, 0] == bp[0]) & (pts[:, 1] == bp[1]))
        if len(hits):
            idx = int(hits[0])
        else:
            pts = np.vstack([pts, bp])
            idx = len(pts) - 1
        hint = 1.0 / ((self.resolution - 1) * math.sqrt(2.0))
        object.__setattr__(self, "cloud", PointCloud(pts, hint, unit_square()))
        object.__setattr__(self, "base_index", idx)


def iterate_domain(m, n: int, dom: FundamentalDomain, threads: int | None = None) -> list[PointCloud]:
    """Clouds ``f(D), ..., f^n(D)``, each obtained from the previous one."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InvalidInput("n must be a positive integer")
    m = _as_map(m)
    out = []
    cur = dom.cloud
    for _ in range(n):
        cur = m.push(cur, threads)
        out.append(cur)
    return out


def cq_conjugate(base, q: int, *, samples: int = 256, seed: int = 0) -> RescaledLift:
    """Wrap a Z^2-equivariant map as ``C_q o base o C_q^-1``."""
    base = _as_map(base)
    defect = equivariance_check(base, [(1.0, 0.0), (0.0, 1.0)], samples, seed=seed)
    if defect > 1e-9:
        raise ConstructionError(f"base map is not Z^2-equivariant (defect {defect:.3g})")
    return RescaledLift(base, q)


def equivariance_check(m, lattice, samples: int, *, seed: int = 0) -> float:
    """Largest ``|m(p + z) - m(p) - z|`` over random points ``p`` and ``z`` in ``lattice``.

    Points are drawn uniformly from ``[-2, 2]^2`` with the given seed and
    rounded to multiples of ``2^-40``, so that ``p + z`` is exact for integer
    ``z`` and the defect measures the map rather than the input rounding.
    """
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 1:
        raise InvalidInput("samples must be a positive integer")
    m = _as_map(m)
    L = np.asarray(lattice, dtype=float).reshape(-1, 2)
    rng = np.random.default_rng(seed)
    P = np.round(rng.uniform(-2.0, 2.0, size=(samples, 2)) * DYADIC) / DYADIC
    base = m(P)
    worst = 0.0
    for z in L:
        d = m(P + z) - base - z
        worst = max(worst, float(np.max(np.hypot(d[:, 0], d[:, 1]))))
    return worst
