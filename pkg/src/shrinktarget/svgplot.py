"""Minimal native SVG line plots for checkpoint data."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def line_plot(series: Mapping[str, Sequence[tuple[float, float]]], *, title: str = "", logx: bool = False,
              logy: bool = False, width: int = 640, height: int = 400) -> str:
    """Polylines for each named series; axes carry min/max tick labels only."""
    pad_l, pad_r, pad_t, pad_b = 70, 150, 40, 50

    def tx(v: float) -> float | None:
        if logx:
            return math.log10(v) if v > 0 else None
        return v

    def ty(v: float) -> float | None:
        if v is None or (isinstance(v, float) and not math.isfinite(v)):
            return None
        if logy:
            return math.log10(v) if v > 0 else None
        return v

    pts = {name: [(tx(x), ty(y)) for x, y in data] for name, data in series.items()}
    pts = {k: [(x, y) for x, y in v if x is not None and y is not None] for k, v in pts.items()}
    xs = [x for v in pts.values() for x, _ in v]
    ys = [y for v in pts.values() for _, y in v]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle">{escape(title)}</text>']
    if not xs:
        out.append(f'<text x="{width / 2:.1f}" y="{height / 2:.1f}" text-anchor="middle">no data</text></svg>')
        return "\n".join(out) + "\n"
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x):
        return pad_l + (x - x0) / (x1 - x0) * pw

    def py(y):
        return pad_t + ph - (y - y0) / (y1 - y0) * ph

    out.append(f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>')
    fx = (lambda v: f"1e{v:.2g}") if logx else (lambda v: f"{v:.4g}")
    fy = (lambda v: f"1e{v:.2g}") if logy else (lambda v: f"{v:.4g}")
    out.append(f'<text x="{pad_l}" y="{height - pad_b + 18}" text-anchor="start">{fx(x0)}</text>')
    out.append(f'<text x="{pad_l + pw}" y="{height - pad_b + 18}" text-anchor="end">{fx(x1)}</text>')
    out.append(f'<text x="{pad_l - 6}" y="{pad_t + ph}" text-anchor="end">{fy(y0)}</text>')
    out.append(f'<text x="{pad_l - 6}" y="{pad_t + 10}" text-anchor="end">{fy(y1)}</text>')
    for k, (name, data) in enumerate(pts.items()):
        color = PALETTE[k % len(PALETTE)]
        if data:
            poly = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in data)
            out.append(f'<polyline points="{poly}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = pad_t + 16 * k + 10
        out.append(f'<line x1="{width - pad_r + 10}" y1="{ly - 4}" x2="{width - pad_r + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{width - pad_r + 35}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
