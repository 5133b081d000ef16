"""Minimal SVG line plots on log-log axes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 480
MARGIN = 60
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False


@dataclass
class LogLogPlot:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)

    def add(self, label: str, x, y, dashed: bool = False) -> None:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
        self.series.append(Series(label, x[keep], y[keep], dashed))

    def slope_guide(self, label: str, slope: float, x0: float, y0: float, decades: float = 1.0) -> None:
        """Straight line of the given log-log slope through (x0, y0)."""
        x = np.array([x0, x0 * 10**decades])
        self.add(label, x, y0 * (x / x0) ** slope, dashed=True)

    def _bounds(self) -> tuple[float, float, float, float]:
        xs = np.concatenate([s.x for s in self.series if s.x.size]) if self.series else np.array([1.0, 10.0])
        ys = np.concatenate([s.y for s in self.series if s.y.size]) if self.series else np.array([1.0, 10.0])
        if xs.size == 0:
            xs = ys = np.array([1.0, 10.0])
        lx = (math.floor(math.log10(xs.min())), math.ceil(math.log10(xs.max())))
        ly = (math.floor(math.log10(ys.min())), math.ceil(math.log10(ys.max())))
        return lx[0], max(lx[1], lx[0] + 1), ly[0], max(ly[1], ly[0] + 1)

    def render(self) -> str:
        x0, x1, y0, y1 = self._bounds()
        w, h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

        def px(v: np.ndarray) -> np.ndarray:
            return MARGIN + (np.log10(v) - x0) / (x1 - x0) * w

        def py(v: np.ndarray) -> np.ndarray:
            return HEIGHT - MARGIN - (np.log10(v) - y0) / (y1 - y0) * h

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
               f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
               f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
               f'<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="black"/>']
        for k in range(x0, x1 + 1):
            x = MARGIN + (k - x0) / (x1 - x0) * w
            out.append(f'<line x1="{x:.1f}" y1="{HEIGHT - MARGIN}" x2="{x:.1f}" y2="{HEIGHT - MARGIN + 5}" stroke="black"/>')
            out.append(f'<text x="{x:.1f}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle">1e{k}</text>')
        for k in range(y0, y1 + 1):
            y = HEIGHT - MARGIN - (k - y0) / (y1 - y0) * h
            out.append(f'<line x1="{MARGIN - 5}" y1="{y:.1f}" x2="{MARGIN}" y2="{y:.1f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN - 8}" y="{y + 4:.1f}" text-anchor="end">1e{k}</text>')
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(self.ylabel)}</text>')
        for i, s in enumerate(self.series):
            if s.x.size < 2:
                continue
            colour = COLOURS[i % len(COLOURS)]
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(s.x), py(s.y)))
            dash = ' stroke-dasharray="6,4"' if s.dashed else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>')
            out.append(f'<text x="{WIDTH - MARGIN - 5}" y="{MARGIN + 15 + 14 * i}" text-anchor="end" '
                       f'fill="{colour}">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def profile_plot(title: str, curves: Sequence[tuple[str, np.ndarray, np.ndarray]],
                 slopes: Sequence[tuple[str, float]]) -> str:
    """Profiles F(r) with dashed guides of the given decay exponents anchored near the curves' far end."""
    plot = LogLogPlot(title, "r", "F(r)")
    for label, r, F in curves:
        plot.add(label, r, F)
    if curves:
        label, r, F = curves[0]
        keep = (r > 0) & (F > 0)
        r, F = r[keep], F[keep]
        if r.size:
            i = int(0.5 * r.size)
            for name, q in slopes:
                plot.slope_guide(name, -q, r[i], F[i] * 2.0)
    return plot.render()
