"""Dependency-free scatter of range advantage against optimal defense frequency."""

from __future__ import annotations

from typing import Sequence

from .datagen import DatasetRow

WIDTH = 640
HEIGHT = 640
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _x(v: float) -> float:
    return MARGIN + v * (WIDTH - 2 * MARGIN)


def _y(v: float) -> float:
    return HEIGHT - MARGIN - v * (HEIGHT - 2 * MARGIN)


def scatter_svg(rows: Sequence[DatasetRow], title: str = "Range advantage vs. optimal defense frequency") -> str:
    """SVG with axes [0, 1] x [0, 1], one colour and one MDF line per bet size."""
    if not rows:
        raise ValueError("no rows")
    sizes = sorted({r.bet_size for r in rows})
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="30" text-anchor="middle" font-size="16">{title}</text>',
        f'<line class="axis" x1="{_x(0)}" y1="{_y(0)}" x2="{_x(1)}" y2="{_y(0)}" stroke="black"/>',
        f'<line class="axis" x1="{_x(0)}" y1="{_y(0)}" x2="{_x(0)}" y2="{_y(1)}" stroke="black"/>',
    ]
    for i in range(11):
        t = i / 10
        out.append(f'<line x1="{_x(t)}" y1="{_y(0)}" x2="{_x(t)}" y2="{_y(0) + 5}" stroke="black"/>')
        out.append(f'<text x="{_x(t)}" y="{_y(0) + 20}" text-anchor="middle" font-size="11">{t:.1f}</text>')
        out.append(f'<line x1="{_x(0) - 5}" y1="{_y(t)}" x2="{_x(0)}" y2="{_y(t)}" stroke="black"/>')
        out.append(f'<text x="{_x(0) - 8}" y="{_y(t) + 4}" text-anchor="end" font-size="11">{t:.1f}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="13">range advantage</text>')
    out.append(f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" font-size="13" '
               f'transform="rotate(-90 18 {HEIGHT / 2})">optimal defense frequency</text>')
    for k, size in enumerate(sizes):
        color = COLORS[k % len(COLORS)]
        out.append(f'<g class="points" data-bet-size="{size:g}" fill="{color}" fill-opacity="0.35">')
        for r in rows:
            if r.bet_size == size:
                out.append(f'<circle cx="{_x(r.ra):.2f}" cy="{_y(r.odf):.2f}" r="1.5"/>')
        out.append("</g>")
    for k, size in enumerate(sizes):
        color = COLORS[k % len(COLORS)]
        mdf = 1.0 / (1.0 + size)
        out.append(f'<line class="mdf" data-mdf="{mdf:g}" x1="{_x(0)}" y1="{_y(mdf):.2f}" '
                   f'x2="{_x(1)}" y2="{_y(mdf):.2f}" stroke="{color}" stroke-dasharray="6 4"/>')
        out.append(f'<text x="{_x(1) + 4}" y="{_y(mdf) + 4:.2f}" font-size="11" fill="{color}">MDF {mdf:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_csv(rows: Sequence[DatasetRow]) -> str:
    if not rows:
        raise ValueError("no rows")
    return "ra,odf\n" + "".join(f"{r.ra:.12g},{r.odf:.12g}\n" for r in rows)
