"""Minimal log-log line plots (polyline + axes) for report rows. Advisory only; the CSV is canonical."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from smoothlab.shared.files import atomic_write_text

WIDTH = 640
HEIGHT = 400
MARGIN = 48
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _positive(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    return [(x, y) for x, y in points if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)]


def loglog_svg(series: dict[str, Sequence[tuple[float, float]]], title: str = "") -> str:
    """One polyline per named series; non-positive or infinite points are dropped."""
    clean = {name: _positive(pts) for name, pts in series.items()}
    allpts = [p for pts in clean.values() for p in pts]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
             f'viewBox="0 0 {WIDTH} {HEIGHT}">',
             f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        parts.append(f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    x0, y0, x1, y1 = MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2, MARGIN
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    if allpts:
        lx = [math.log10(x) for x, _ in allpts]
        ly = [math.log10(y) for _, y in allpts]
        xlo, xhi = min(lx), max(lx)
        ylo, yhi = min(ly), max(ly)
        xhi = xhi if xhi > xlo else xlo + 1.0
        yhi = yhi if yhi > ylo else ylo + 1.0

        def sx(x: float) -> float:
            return x0 + (math.log10(x) - xlo) / (xhi - xlo) * (x1 - x0)

        def sy(y: float) -> float:
            return y0 - (math.log10(y) - ylo) / (yhi - ylo) * (y0 - y1)

        for i, (name, pts) in enumerate(clean.items()):
            if not pts:
                continue
            color = COLORS[i % len(COLORS)]
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
            parts.append(f'<text x="{x1 - 120}" y="{y1 + 16 * (i + 1)}" fill="{color}" font-size="12">'
                         f'{escape(name)}</text>')
        parts.append(f'<text x="{x0}" y="{y0 + 16}" font-size="11">1e{xlo:.2f}</text>')
        parts.append(f'<text x="{x1}" y="{y0 + 16}" font-size="11" text-anchor="end">1e{xhi:.2f}</text>')
        parts.append(f'<text x="4" y="{y0}" font-size="11">1e{ylo:.2f}</text>')
        parts.append(f'<text x="4" y="{y1 + 4}" font-size="11">1e{yhi:.2f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_case_plot(report, path: str | Path) -> Path:
    """t against lhs and rhs of the member attaining the sup ratio (first member otherwise)."""
    f_id = report.argmax.f_id if report.argmax is not None else report.rows[0].f_id
    rows = [r for r in report.rows if r.f_id == f_id]
    series = {
        f"lhs ({f_id})": [(r.t, r.lhs) for r in rows],
        f"rhs ({f_id})": [(r.t, r.rhs) for r in rows],
    }
    return atomic_write_text(path, loglog_svg(series, title=f"{report.label}: {report.verdict}"))
