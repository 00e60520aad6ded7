"""Self-contained SVG 1.1 renderings of stage traces and hull series."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .geom import ConvexPolygon
from .io import atomic_write

__all__ = ["Viewport", "render_trace", "render_hull_series"]

WIDTH = 800
MARGIN = 10
LEGEND_LINE = 16
PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666")


class Viewport:
    """World-to-pixel transform of a bounding box (y axis pointing up)."""

    def __init__(self, lo, hi, width: int = WIDTH, inflate: float = 0.05):
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        span = np.maximum(hi - lo, 1e-9)
        pad = inflate * span
        self.lo, self.hi = lo - pad, hi + pad
        span = self.hi - self.lo
        self.scale = (width - 2 * MARGIN) / span[0]
        self.width = width
        self.height = int(np.ceil(span[1] * self.scale)) + 2 * MARGIN

    def __call__(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        x = MARGIN + (P[:, 0] - self.lo[0]) * self.scale
        y = self.height - MARGIN - (P[:, 1] - self.lo[1]) * self.scale
        return np.column_stack([x, y])


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _polygon(poly: ConvexPolygon, vp: Viewport, color: str, opacity: float = 1.0) -> str:
    pts = vp(poly.vertices)
    if poly.is_point:
        x, y = pts[0]
        return (f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="{color}" '
                f'fill-opacity="{opacity:.3f}" class="point"/>')
    d = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in pts)
    if not poly.degenerate:
        d += " Z"
    return (f'<path d="{d}" fill="{color}" fill-opacity="{0.15 * opacity:.3f}" '
            f'stroke="{color}" stroke-opacity="{opacity:.3f}" stroke-width="1.5"/>')


def _cloud(points: np.ndarray, vp: Viewport, color: str, max_points: int) -> str:
    if len(points) > max_points:
        idx = np.linspace(0, len(points) - 1, max_points).round().astype(int)
        points = points[idx]
    pix = vp(points)
    dots = "".join(f'<rect x="{_fmt(x - 0.5)}" y="{_fmt(y - 0.5)}" width="1" height="1"/>'
                   for x, y in pix)
    return f'<g fill="{color}" fill-opacity="0.6">{dots}</g>'


def _document(vp: Viewport, body: list[str], legend: list[tuple[str, str]]) -> str:
    height = vp.height + LEGEND_LINE * len(legend) + MARGIN
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{vp.width}" '
        f'height="{height}" viewBox="0 0 {vp.width} {height}">',
        f'<rect x="0" y="0" width="{vp.width}" height="{height}" fill="white"/>',
    ]
    out.extend(body)
    out.append('<g font-family="monospace" font-size="12" class="legend">')
    for k, (color, text) in enumerate(legend):
        y = vp.height + LEGEND_LINE * (k + 1)
        out.append(f'<rect x="{MARGIN}" y="{y - 10}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{MARGIN + 16}" y="{y}">{escape(text)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write(doc: str, path) -> str:
    if path is not None:
        try:
            atomic_write(Path(path), doc)
        except OSError as exc:
            raise OSError(f"cannot write SVG to {path}: {exc}") from exc
    return doc


def render_trace(trace, path=None, max_points: int = 4000) -> str:
    """Layered picture of ``K_i`` polygons and ``D_i`` clouds, one layer pair per stage.

    ``trace`` is a :class:`StageTrace` or a list of its stage records. The
    viewport is the bounding box of the last stage, inflated by 5%.
    """
    stages = list(getattr(trace, "stages", trace))
    if not stages:
        raise ValueError("cannot render an empty trace")
    last = stages[-1]
    box = np.vstack([last.D.points, last.K.vertices])
    vp = Viewport(box.min(axis=0), box.max(axis=0))
    body, legend = [], []
    for s in stages:
        color = PALETTE[s.index % len(PALETTE)]
        body.append(f'<g id="stage-{s.index}" class="stage">')
        body.append(f'<g class="cloud">{_cloud(s.D.points, vp, color, max_points)}</g>')
        body.append(f'<g class="polygon">{_polygon(s.K, vp, color)}</g>')
        body.append("</g>")
        legend.append((color, f"stage {s.index}: D->K {s.d_to_k.upper:.4g} "
                              f"(<= {s.d_to_k.bound:g}), K->D {s.k_to_d.upper:.4g}"))
    return _write(_document(vp, body, legend), path)


def render_hull_series(estimates: Sequence, path=None, target: ConvexPolygon | None = None,
                       max_points: int = 4000) -> str:
    """Overlaid hulls (rotation estimates) or normalised clouds (generalised ones).

    Later entries are drawn more opaque. ``target`` is drawn in black on top.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("cannot render an empty series")
    shapes = []
    for e in estimates:
        if hasattr(e, "hull"):
            shapes.append(("hull", e.n, e.hull))
        else:
            for n, c in zip(e.subsequence, e.clouds):
                shapes.append(("cloud", n, c.points))
    pts = [s[2].vertices if s[0] == "hull" else s[2] for s in shapes]
    if target is not None:
        pts.append(target.vertices)
    box = np.vstack(pts)
    vp = Viewport(box.min(axis=0), box.max(axis=0))
    body, legend = [], []
    k = len(shapes)
    for i, (kind, n, shape) in enumerate(shapes):
        color = PALETTE[i % len(PALETTE)]
        opacity = 0.3 + 0.7 * (i + 1) / k
        if kind == "hull":
            body.append(f'<g class="hull" id="hull-{i}">{_polygon(shape, vp, color, opacity)}</g>')
            legend.append((color, f"n={n}: hull diameter {shape.diameter:.4g}"))
        else:
            body.append(f'<g class="cloud" id="cloud-{i}">{_cloud(shape, vp, color, max_points)}</g>')
            legend.append((color, f"n={n}: normalised cloud"))
    if target is not None:
        body.append(f'<g class="target">{_polygon(target, vp, "#000000")}</g>')
        legend.append(("#000000", "target"))
    return _write(_document(vp, body, legend), path)
