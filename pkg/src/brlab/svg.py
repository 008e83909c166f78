"""Minimal SVG line plots with a fixed viewBox (no plotting dependency)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 480
MARGIN = 48
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def split_wraps(x: np.ndarray, y: np.ndarray, jump: float = 0.5) -> list[tuple[np.ndarray, np.ndarray]]:
    """Cut a curve drawn mod 1 wherever a coordinate jumps by more than ``jump``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    cuts = np.flatnonzero((np.abs(np.diff(x)) > jump) | (np.abs(np.diff(y)) > jump)) + 1
    return [(a, b) for a, b in zip(np.split(x, cuts), np.split(y, cuts)) if len(a) > 1]


class LinePlot:
    """Polylines in data coordinates ``xlim x ylim`` mapped to a 640x480 viewBox."""

    def __init__(self, xlim: tuple[float, float], ylim: tuple[float, float], title: str = "",
                 xlabel: str = "", ylabel: str = ""):
        self.xlim = xlim
        self.ylim = ylim
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.groups: list[tuple[str, list[str]]] = []

    def _map(self, x, y):
        (x0, x1), (y0, y1) = self.xlim, self.ylim
        px = MARGIN + (np.asarray(x) - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)
        py = HEIGHT - MARGIN - (np.asarray(y) - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)
        return px, py

    def add(self, pieces: Sequence[tuple[np.ndarray, np.ndarray]], label: str = "") -> None:
        """One orbit; several pieces when the curve wraps around."""
        color = PALETTE[len(self.groups) % len(PALETTE)]
        lines = []
        for x, y in pieces:
            px, py = self._map(x, y)
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
            lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="0.8" points="{pts}"/>')
        self.groups.append((label, lines))

    def render(self) -> str:
        x0, x1 = self.xlim
        y0, y1 = self.ylim
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
            f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" height="{HEIGHT - 2 * MARGIN}" '
            'fill="none" stroke="black"/>',
            f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle">{escape(self.title)}</text>',
            f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(self.xlabel)}</text>',
            f'<text x="12" y="{HEIGHT / 2}" transform="rotate(-90 12 {HEIGHT / 2})" '
            f'text-anchor="middle">{escape(self.ylabel)}</text>',
            f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 14}" text-anchor="middle">{x0:g}</text>',
            f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 14}" text-anchor="middle">{x1:g}</text>',
            f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" text-anchor="end">{y0:g}</text>',
            f'<text x="{MARGIN - 4}" y="{MARGIN + 4}" text-anchor="end">{y1:g}</text>',
        ]
        for label, lines in self.groups:
            out.append(f'<g><title>{escape(label)}</title>')
            out.extend(lines)
            out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render())
        return path


def phase_portrait(orbits: Sequence[np.ndarray], title: str = "phase portrait") -> LinePlot:
    """Twist-map orbits (rows ``theta, I``): theta mod 1 on x, I on y.

    Points of each orbit are joined in order of theta mod 1, which traces the
    curve when the orbit lies on an invariant circle.
    """
    plot = LinePlot((0.0, 1.0), (-1.0, 1.0), title, "theta mod 1", "I")
    for i, orb in enumerate(orbits):
        x = np.mod(orb[:, 0], 1.0)
        order = np.argsort(x, kind="stable")
        plot.add([(x[order], orb[order, 1])], f"orbit {i} from I = {orb[0, 1]:.4g}")
    return plot


def torus_projection(theta: np.ndarray, title: str = "projection") -> LinePlot:
    """First two angles mod 1 of a flow trajectory."""
    plot = LinePlot((0.0, 1.0), (0.0, 1.0), title, "theta_1 mod 1", "theta_2 mod 1")
    x = np.mod(theta[:, 0], 1.0)
    y = np.mod(theta[:, 1], 1.0)
    plot.add(split_wraps(x, y), "trajectory")
    return plot
