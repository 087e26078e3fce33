"""Deterministic SVG rendering of configurations and cluster shadings.

Vertices are embedded so faces are regular hexagons and a-edges run
horizontally; present edges are drawn solid and absent edges faint.  With a
code given, each cluster of that code gets its own fill color, cycling
through a fixed palette.
"""

from __future__ import annotations

import math

from .census import census
from .lattice import BLACK

SQ3_2 = math.sqrt(3.0) / 2.0

PALETTE = (
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
    "#a65628", "#f781bf", "#17becf", "#bcbd22", "#66c2a5",
)

MAX_RENDER_CELLS = 10000


def vertex_xy(v, scale=1.0):
    """Planar embedding; screen y grows downward."""
    x = 1.5 * (v.x + v.y)
    y = SQ3_2 * (v.y - v.x)
    if v.sub == BLACK:
        x += 1.0
    return x * scale, y * scale


def render_svg(cfg, code=None, window=None, scale=18.0, adjacency="lattice"):
    """SVG document string for a configuration; byte-identical per input."""
    g = cfg.geometry
    n_cells = g.n_vertices // 2
    if n_cells > MAX_RENDER_CELLS:
        raise ValueError(
            f"{n_cells} cells is too large to render; crop to a window first"
        )
    pts = {}
    for v in g.vertices():
        pts[v] = vertex_xy(v, scale)
    xs = [p[0] for p in pts.values()]
    ys = [p[1] for p in pts.values()]
    pad = 1.5 * scale
    x0, y0 = min(xs) - pad, min(ys) - pad
    width = max(xs) - min(xs) + 2 * pad
    height = max(ys) - min(ys) + 2 * pad

    def fmt(val):
        return f"{val:.2f}"

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{fmt(x0)} {fmt(y0)} '
        f'{fmt(width)} {fmt(height)}">',
        f'<rect x="{fmt(x0)}" y="{fmt(y0)}" width="{fmt(width)}" height="{fmt(height)}" '
        'fill="#ffffff"/>',
    ]
    absent, present = [], []
    for i in range(g.n_edges):
        e = g.edge_at(i)
        wv, bv = g.endpoints(e)
        (ax, ay), (bx, by) = pts[wv], pts[bv]
        # torus wrap edges would smear across the picture; draw a stub instead
        if abs(ax - bx) > 2.2 * scale or abs(ay - by) > 2.2 * scale:
            bx, by = ax + 0.35 * scale, ay
        seg = f'<line x1="{fmt(ax)}" y1="{fmt(ay)}" x2="{fmt(bx)}" y2="{fmt(by)}"'
        (present if cfg.bits[i] else absent).append(
            seg + (' stroke="#000000" stroke-width="2.4"/>' if cfg.bits[i]
                   else ' stroke="#cccccc" stroke-width="0.7"/>')
        )
    lines.extend(absent)
    lines.extend(present)
    if code is not None:
        clusters = census(cfg, code, window=window, adjacency=adjacency)
        for ci, cl in enumerate(clusters):
            color = PALETTE[ci % len(PALETTE)]
            for v in cl.members:
                px, py = pts[v]
                lines.append(
                    f'<circle cx="{fmt(px)}" cy="{fmt(py)}" r="{fmt(0.30 * scale)}" '
                    f'fill="{color}"/>'
                )
    else:
        for v, (px, py) in pts.items():
            lines.append(
                f'<circle cx="{fmt(px)}" cy="{fmt(py)}" r="{fmt(0.10 * scale)}" '
                'fill="#444444"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
