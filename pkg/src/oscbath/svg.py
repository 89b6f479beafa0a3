"""Minimal self-contained SVG line plots (inline polylines, fixed viewport)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=36, bottom=50)
PALETTE = ("#1f3b73", "#b0413e", "#3c8d5a", "#8a6d1d", "#6b4c9a")


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _ticks(lo, hi, log):
    if log:
        return [10.0 ** k for k in range(int(np.floor(lo)), int(np.ceil(hi)) + 1) if lo <= k <= hi]
    return list(np.linspace(lo, hi, 5))


def line_panel(series, title, xlabel, ylabel, logx=False, logy=False, width=WIDTH, height=HEIGHT,
               offset=(0, 0)) -> str:
    """One panel as an SVG group; ``series`` maps label -> (x, y)."""
    ox, oy = offset
    title, xlabel, ylabel = escape(title), escape(xlabel), escape(ylabel)
    x0, x1 = MARGIN["left"], width - MARGIN["right"]
    y0, y1 = height - MARGIN["bottom"], MARGIN["top"]
    clean = {}
    for label, (x, y) in series.items():
        x, y = np.asarray(x, float), np.asarray(y, float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        clean[label] = (np.log10(x[keep]) if logx else x[keep], np.log10(y[keep]) if logy else y[keep])
    xs = np.concatenate([v[0] for v in clean.values()] or [np.zeros(1)])
    ys = np.concatenate([v[1] for v in clean.values()] or [np.zeros(1)])
    if xs.size == 0:
        xs = ys = np.zeros(1)
    xlo, xhi = float(xs.min()), float(xs.max())
    ylo, yhi = float(ys.min()), float(ys.max())
    if xhi == xlo:
        xhi = xlo + 1
    if yhi == ylo:
        yhi = ylo + 1

    def px(v):
        return x0 + (v - xlo) / (xhi - xlo) * (x1 - x0)

    def py(v):
        return y0 + (v - ylo) / (yhi - ylo) * (y1 - y0)

    out = [f'<g transform="translate({ox},{oy})">',
           f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#444"/>',
           f'<text x="{(x0 + x1) / 2}" y="{MARGIN["top"] - 12}" text-anchor="middle" font-size="14">{title}</text>',
           f'<text x="{(x0 + x1) / 2}" y="{height - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 16 {(y0 + y1) / 2})">{ylabel}</text>']
    for v in _ticks(xlo, xhi, logx):
        pos = np.log10(v) if logx else v
        out.append(f'<text x="{px(pos):.2f}" y="{y0 + 16}" text-anchor="middle" font-size="10">{_fmt(v)}</text>')
    for v in _ticks(ylo, yhi, logy):
        pos = np.log10(v) if logy else v
        out.append(f'<text x="{x0 - 6}" y="{py(pos) + 3:.2f}" text-anchor="end" font-size="10">{_fmt(v)}</text>')
    for i, (label, (x, y)) in enumerate(clean.items()):
        color = PALETTE[i % len(PALETTE)]
        if x.size > 2000:
            idx = np.unique(np.linspace(0, x.size - 1, 2000).astype(int))
            x, y = x[idx], y[idx]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{x1 - 8}" y="{y1 + 16 + 14 * i}" text-anchor="end" font-size="11" '
                   f'fill="{color}">{escape(label)}</text>')
    out.append("</g>")
    return "\n".join(out)


def figure(panels, width=WIDTH, height=HEIGHT) -> str:
    """Stack panels (each a dict of ``line_panel`` keyword arguments) vertically."""
    body = [line_panel(offset=(0, k * height), width=width, height=height, **p) for k, p in enumerate(panels)]
    total = height * len(panels)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{total}" '
            f'viewBox="0 0 {width} {total}">\n<rect width="100%" height="100%" fill="white"/>\n'
            + "\n".join(body) + "\n</svg>\n")
