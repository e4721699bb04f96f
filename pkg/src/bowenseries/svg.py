"""Minimal SVG writer for line plots and disc diagrams.

Coordinates are written with 12 significant digits so that identical
inputs give identical files.
"""

from __future__ import annotations

import math
from html import escape

import numpy as np


def fmt(v: float) -> str:
    return f"{float(v):.12g}"


class Canvas:
    def __init__(self, width: int = 480, height: int = 480):
        self.width = width
        self.height = height
        self.items = []

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<line x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{fmt(width)}"{extra}/>'
        )

    def polyline(self, xs, ys, stroke="#000", width=1.0):
        pts = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in zip(xs, ys))
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{fmt(width)}"/>')

    def circle(self, cx, cy, r, stroke="#000", fill="none", width=1.0):
        self.items.append(
            f'<circle cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r)}" stroke="{stroke}" fill="{fill}" '
            f'stroke-width="{fmt(width)}"/>'
        )

    def path(self, d, stroke="#000", fill="none", width=1.0):
        self.items.append(f'<path d="{d}" stroke="{stroke}" fill="{fill}" stroke-width="{fmt(width)}"/>')

    def rect(self, x, y, w, h, stroke="none", fill="#ccc"):
        self.items.append(
            f'<rect x="{fmt(x)}" y="{fmt(y)}" width="{fmt(w)}" height="{fmt(h)}" stroke="{stroke}" fill="{fill}"/>'
        )

    def text(self, x, y, s, size=11, anchor="middle"):
        self.items.append(
            f'<text x="{fmt(x)}" y="{fmt(y)}" font-size="{size}" text-anchor="{anchor}" '
            f'font-family="sans-serif">{escape(str(s))}</text>'
        )

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *self.items, "</svg>"]) + "\n"


class Plot:
    """Square plot of ``[-pi, pi]^2`` (or given limits) with a frame and ticks."""

    def __init__(self, title: str, lim=(-math.pi, math.pi), size: int = 480, margin: int = 40):
        self.c = Canvas(size, size)
        self.lim = lim
        self.m = margin
        self.span = size - 2 * margin
        c = self.c
        c.rect(margin, margin, self.span, self.span, stroke="#000", fill="none")
        c.text(size / 2, margin / 2 + 4, title, size=13)
        lo, hi = lim
        for t in np.linspace(lo, hi, 5):
            px, py = self.px(t), self.py(t)
            c.line(px, margin + self.span, px, margin + self.span + 4)
            c.text(px, margin + self.span + 16, f"{t:.2f}", size=9)
            c.line(margin - 4, py, margin, py)
            c.text(margin - 6, py + 3, f"{t:.2f}", size=9, anchor="end")

    def px(self, x):
        lo, hi = self.lim
        return self.m + (np.asarray(x) - lo) / (hi - lo) * self.span

    def py(self, y):
        lo, hi = self.lim
        return self.m + (hi - np.asarray(y)) / (hi - lo) * self.span

    def curve(self, xs, ys, stroke="#1f4e9c", width=1.2, jump=math.pi):
        """Polyline broken wherever consecutive y-values jump by more than ``jump``."""
        xs, ys = np.asarray(xs), np.asarray(ys)
        breaks = np.flatnonzero((np.abs(np.diff(ys)) > jump) | (np.diff(xs) < 0)) + 1
        for seg in np.split(np.arange(len(xs)), breaks):
            if len(seg) > 1:
                self.c.polyline(self.px(xs[seg]), self.py(ys[seg]), stroke=stroke, width=width)

    def vline(self, x, stroke="#999"):
        self.c.line(self.px(x), self.m, self.px(x), self.m + self.span, stroke=stroke, width=0.5, dash="3,3")

    def render(self) -> str:
        return self.c.render()
