"""Minimal deterministic SVG line/scatter plots.

Output depends only on the input numbers: no timestamps, ids or random
salts, so identical series give byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .errors import DomainError

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 55
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float, log: bool) -> str:
    return f"1e{v:g}" if log else f"{v:.4g}"


def _axis(v: float, log: bool) -> float:
    v = float(v)
    if not log:
        return v
    return math.log10(v) if v > 0 else math.nan


def render_svg(series: Sequence[Series], *, title: str = "", xlabel: str = "x", ylabel: str = "y",
               logx: bool = False, logy: bool = False, lines: bool = True) -> str:
    """Render one or more series into an SVG 1.1 document string."""
    if not series or all(len(s.x) == 0 for s in series):
        raise DomainError("nothing to plot")
    pts = []
    for s in series:
        if len(s.x) != len(s.y):
            raise DomainError(f"series {s.label!r}: x and y lengths differ")
        xs = [_axis(v, logx) for v in s.x]
        ys = [_axis(v, logy) for v in s.y]
        if not all(math.isfinite(v) for v in xs + ys):
            raise DomainError(f"series {s.label!r} has non-finite values (or non-positive on a log axis)")
        pts.append((s.label, xs, ys))
    allx = [v for _, xs, _ in pts for v in xs]
    ally = [v for _, _, ys in pts for v in ys]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN_T + ph - (v - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{_fmt(sx(fx))}" y="{HEIGHT - MARGIN_B + 18}" font-size="11" '
                   f'text-anchor="middle">{escape(_tick(fx, logx))}</text>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{_fmt(sy(fy) + 4)}" font-size="11" '
                   f'text-anchor="end">{escape(_tick(fy, logy))}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.2f}" y="{HEIGHT - 12}" font-size="13" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN_T + ph / 2:.2f}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.2f})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="20" font-size="14" text-anchor="middle">{escape(title)}</text>')
    for k, (label, xs, ys) in enumerate(pts):
        color = COLORS[k % len(COLORS)]
        coords = [(sx(a), sy(b)) for a, b in zip(xs, ys)]
        if lines and len(coords) > 1:
            path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in coords)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for a, b in coords:
            out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="3" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN_R - 6}" y="{MARGIN_T + 16 + 15 * k}" font-size="11" '
                   f'text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(series: Sequence[Series], path: str | Path, **kw) -> Path:
    """Write :func:`render_svg` output to ``path``."""
    path = Path(path)
    path.write_text(render_svg(series, **kw), encoding="utf-8")
    return path
