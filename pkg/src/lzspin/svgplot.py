"""Minimal SVG line charts with no plotting dependencies.

Deliberately small: linear or log-10 x axis, linear y axis, a handful of
ticks, one polyline or point cloud per series, and a text legend.  Charts
are for desk inspection of CLI outputs, not publication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = ["Series", "line_chart", "write_chart"]

_WIDTH, _HEIGHT = 720, 460
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 78, 24, 42, 58
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass(frozen=True)
class Series:
    """One plotted series; ``style`` is "line" or "points"."""

    label: str
    x: np.ndarray
    y: np.ndarray
    style: str = "line"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_chart(
    series: Sequence[Series],
    title: str,
    x_label: str,
    y_label: str,
    log_x: bool = False,
) -> str:
    """Render the chart and return the SVG document text."""
    if not series:
        raise ValueError("need at least one series")
    xs = np.concatenate([np.asarray(s.x, dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s.y, dtype=float) for s in series])
    if xs.size == 0:
        raise ValueError("series contain no points")
    if log_x and np.any(xs <= 0):
        raise ValueError("log_x requires strictly positive x values")

    tx = np.log10(xs) if log_x else xs
    x_lo, x_hi = float(tx.min()), float(tx.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    px_w = _WIDTH - _MARGIN_L - _MARGIN_R
    px_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        v = math.log10(x) if log_x else x
        return _MARGIN_L + px_w * (v - x_lo) / (x_hi - x_lo)

    def sy(y: float) -> float:
        return _MARGIN_T + px_h * (1.0 - (y - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="24" font-family="sans-serif" '
        f'font-size="15" text-anchor="middle">{title}</text>',
    ]
    axis_y = _MARGIN_T + px_h
    out.append(
        f'<line x1="{_MARGIN_L}" y1="{axis_y}" x2="{_MARGIN_L + px_w}" '
        f'y2="{axis_y}" stroke="black"/>'
    )
    out.append(
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
        f'y2="{axis_y}" stroke="black"/>'
    )
    for t in _ticks(x_lo, x_hi):
        x_px = _MARGIN_L + px_w * (t - x_lo) / (x_hi - x_lo)
        label = _fmt(10.0**t) if log_x else _fmt(t)
        out.append(
            f'<line x1="{x_px:.1f}" y1="{axis_y}" x2="{x_px:.1f}" '
            f'y2="{axis_y + 5}" stroke="black"/>'
        )
        out.append(
            f'<text x="{x_px:.1f}" y="{axis_y + 20}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{label}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        y_px = sy(t)
        out.append(
            f'<line x1="{_MARGIN_L - 5}" y1="{y_px:.1f}" x2="{_MARGIN_L}" '
            f'y2="{y_px:.1f}" stroke="black"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L - 9}" y="{y_px + 4:.1f}" '
            f'font-family="sans-serif" font-size="11" '
            f'text-anchor="end">{_fmt(t)}</text>'
        )
    out.append(
        f'<text x="{_MARGIN_L + px_w / 2:.1f}" y="{_HEIGHT - 14}" '
        f'font-family="sans-serif" font-size="13" '
        f'text-anchor="middle">{x_label}</text>'
    )
    out.append(
        f'<text x="20" y="{_MARGIN_T + px_h / 2:.1f}" '
        f'font-family="sans-serif" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 20 {_MARGIN_T + px_h / 2:.1f})">{y_label}</text>'
    )

    for k, s in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        x_arr = np.asarray(s.x, dtype=float)
        y_arr = np.asarray(s.y, dtype=float)
        if s.style == "points":
            for xv, yv in zip(x_arr, y_arr):
                out.append(
                    f'<circle cx="{sx(xv):.2f}" cy="{sy(yv):.2f}" r="3" '
                    f'fill="{color}" fill-opacity="0.8"/>'
                )
        else:
            pts = " ".join(
                f"{sx(xv):.2f},{sy(yv):.2f}" for xv, yv in zip(x_arr, y_arr)
            )
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.6"/>'
            )
        out.append(
            f'<text x="{_WIDTH - _MARGIN_R - 6}" y="{_MARGIN_T + 16 + 16 * k}" '
            f'font-family="sans-serif" font-size="12" text-anchor="end" '
            f'fill="{color}">{s.label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, series, title, x_label, y_label, log_x=False) -> None:
    Path(path).write_text(line_chart(series, title, x_label, y_label, log_x))
