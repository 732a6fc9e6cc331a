"""Minimal hand-rolled SVG log-log line charts for sweep results."""
from __future__ import annotations

import math

_W, _H = 640, 480
_MARGIN = 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def write_loglog_svg(path: str, series: dict, title: str = "") -> None:
    """Write one polyline per series of (h, value) points, log-log axes."""
    pts_all = [
        (h, v)
        for pts in series.values()
        for h, v in pts
        if h > 0 and v > 0 and math.isfinite(v)
    ]
    if not pts_all:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(
                f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}">'
                "<text x='20' y='40'>no finite data</text></svg>\n"
            )
        return
    lx = [math.log10(h) for h, _ in pts_all]
    ly = [math.log10(v) for _, v in pts_all]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(x):
        return _MARGIN + (x - x0) / (x1 - x0) * (_W - 2 * _MARGIN)

    def sy(y):
        return _H - _MARGIN - (y - y0) / (y1 - y0) * (_H - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="24" text-anchor="middle">{title}</text>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<text x="{_W // 2}" y="{_H - 16}" text-anchor="middle">log10 h</text>',
        f'<text x="14" y="{_H // 2}" transform="rotate(-90 14 {_H // 2})" '
        f'text-anchor="middle">log10 value</text>',
    ]
    for i, (name, pts) in enumerate(sorted(series.items())):
        color = _COLORS[i % len(_COLORS)]
        pts = sorted((h, v) for h, v in pts if h > 0 and v > 0 and math.isfinite(v))
        if not pts:
            continue
        coords = " ".join(
            f"{sx(math.log10(h)):.1f},{sy(math.log10(v)):.1f}" for h, v in pts
        )
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
        for h, v in pts:
            parts.append(
                f'<circle cx="{sx(math.log10(h)):.1f}" cy="{sy(math.log10(v)):.1f}" '
                f'r="3" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{_W - _MARGIN + 4}" y="{_MARGIN + 16 * i}" fill="{color}" '
            f'text-anchor="end">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
