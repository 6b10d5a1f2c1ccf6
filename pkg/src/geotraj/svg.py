"""Minimal hand-rolled SVG charts: deterministic text output, no dependencies.

Three artifact styles: per-checkpoint error bars, a UTM-plane trajectory
overlay, and the error-vs-outage scatter with log y and fitted drift lines.
Numbers are formatted with fixed precision so identical inputs yield
byte-identical files.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

WIDTH = 800
HEIGHT = 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 40, 55

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_LOG_FLOOR = 1e-4


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" font-size="16" text-anchor="middle">'
        f'{_esc(title)}</text>',
    ]


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def _text(x: float, y: float, s: str, size: int = 11, anchor: str = "middle",
          rotate: float | None = None) -> str:
    extra = (f' transform="rotate({_fmt(rotate)} {_fmt(x)} {_fmt(y)})"'
             if rotate is not None else "")
    return (f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'text-anchor="{anchor}"{extra}>{_esc(s)}</text>')


def _line(x1: float, y1: float, x2: float, y2: float, color: str = "#888",
          width: float = 1.0, dash: str | None = None) -> str:
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{color}" stroke-width="{width}"{extra}/>')


def _polyline(pts: Sequence[tuple[float, float]], color: str,
              width: float = 1.5) -> str:
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
    return (f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"/>')


def _circle(x: float, y: float, r: float, color: str, fill: bool = True) -> str:
    style = (f'fill="{color}"' if fill
             else f'fill="none" stroke="{color}" stroke-width="1.5"')
    return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" {style}/>'


def _placeholder(title: str, message: str) -> str:
    parts = _header(title)
    parts.append(_text(WIDTH / 2, HEIGHT / 2, message, size=14))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _plot_area() -> tuple[float, float, float, float]:
    """(x0, y0, x1, y1) with y0 the top edge in SVG coordinates."""
    return (MARGIN_L, MARGIN_T + 10, WIDTH - MARGIN_R, HEIGHT - MARGIN_B)


def bar_chart(labels: Sequence[str], values: Sequence[float], title: str,
              ylabel: str) -> str:
    if not labels:
        return _placeholder(title, "no data")
    x0, y0, x1, y1 = _plot_area()
    vmax = max(max(values), 1e-9)
    top = vmax * 1.15
    parts = _header(title)
    parts.append(_line(x0, y1, x1, y1, "#333"))
    parts.append(_line(x0, y0, x0, y1, "#333"))
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = frac * top
        y = y1 - frac * (y1 - y0)
        parts.append(_line(x0 - 4, y, x0, y, "#333"))
        parts.append(_text(x0 - 8, y + 4, f"{v:.3f}", anchor="end"))
        if frac > 0:
            parts.append(_line(x0, y, x1, y, "#ddd"))
    parts.append(_text(18, (y0 + y1) / 2, ylabel, rotate=-90.0))
    n = len(labels)
    slot = (x1 - x0) / n
    bar_w = slot * 0.6
    for i, (label, value) in enumerate(zip(labels, values)):
        cx = x0 + (i + 0.5) * slot
        h = (value / top) * (y1 - y0)
        parts.append(f'<rect x="{_fmt(cx - bar_w / 2)}" y="{_fmt(y1 - h)}" '
                     f'width="{_fmt(bar_w)}" height="{_fmt(h)}" fill="{PALETTE[0]}"/>')
        parts.append(_text(cx, y1 + 14, label, size=10, rotate=-35.0, anchor="end"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def trajectory_overlay(tracks: Mapping[str, np.ndarray],
                       checkpoints: Sequence[tuple[str, float, float]],
                       title: str) -> str:
    """tracks: label -> (N, 2) easting/northing arrays; equal-aspect plot."""
    if not tracks and not checkpoints:
        return _placeholder(title, "no data")
    xs = [np.asarray(a)[:, 0] for a in tracks.values()]
    ys = [np.asarray(a)[:, 1] for a in tracks.values()]
    if checkpoints:
        xs.append(np.array([c[1] for c in checkpoints]))
        ys.append(np.array([c[2] for c in checkpoints]))
    all_x = np.concatenate(xs)
    all_y = np.concatenate(ys)
    x0, y0, x1, y1 = _plot_area()
    span = max(float(all_x.max() - all_x.min()), float(all_y.max() - all_y.min()), 1.0)
    span *= 1.1
    cx_data = (float(all_x.max()) + float(all_x.min())) / 2
    cy_data = (float(all_y.max()) + float(all_y.min())) / 2
    scale = min(x1 - x0, y1 - y0) / span

    def to_px(e: float, n: float) -> tuple[float, float]:
        return ((x0 + x1) / 2 + (e - cx_data) * scale,
                (y0 + y1) / 2 - (n - cy_data) * scale)

    parts = _header(title)
    parts.append(_text((x0 + x1) / 2, HEIGHT - 14,
                       f"easting/northing, {span:.0f} m span", size=11))
    for i, (label, arr) in enumerate(tracks.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = [to_px(float(e), float(n)) for e, n in np.asarray(arr)]
        parts.append(_polyline(pts, color))
        parts.append(_text(x1 - 8, y0 + 16 + 16 * i, label, anchor="end"))
        parts.append(_line(x1 - 70, y0 + 12 + 16 * i, x1 - 56, y0 + 12 + 16 * i,
                           color, 3.0))
    for cp_id, e, n in checkpoints:
        px, py = to_px(e, n)
        parts.append(_circle(px, py, 4.0, "#000", fill=False))
        parts.append(_text(px, py - 7, cp_id, size=9))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def drift_scatter(series: Mapping[str, tuple[np.ndarray, np.ndarray]],
                  fits: Mapping[str, "DriftFit"], axis: str) -> str:
    """Error vs outage coordinate, log y, with fitted eps0 + alpha*x lines."""
    xlabel = ("time to nearest RTK fix [s]" if axis == "time"
              else "distance to nearest RTK fix [m]")
    title = "absolute error vs " + xlabel
    nonempty = {m: (x, y) for m, (x, y) in series.items() if len(x)}
    if not nonempty:
        return _placeholder(title, "no samples")
    x0, y0, x1, y1 = _plot_area()
    all_x = np.concatenate([x for x, _ in nonempty.values()])
    all_y = np.concatenate([y for _, y in nonempty.values()])
    xmax = max(float(all_x.max()) * 1.05, 1e-6)
    ymin = max(float(all_y.min()) * 0.5, _LOG_FLOOR)
    ymax = max(float(all_y.max()) * 2.0, ymin * 10.0)
    log_lo, log_hi = math.log10(ymin), math.log10(ymax)

    def to_px(x: float, y: float) -> tuple[float, float]:
        fy = (math.log10(max(y, _LOG_FLOOR)) - log_lo) / (log_hi - log_lo)
        return (x0 + (x / xmax) * (x1 - x0), y1 - fy * (y1 - y0))

    parts = _header(title)
    parts.append(_line(x0, y1, x1, y1, "#333"))
    parts.append(_line(x0, y0, x0, y1, "#333"))
    for exp in range(math.floor(log_lo), math.ceil(log_hi) + 1):
        if not log_lo <= exp <= log_hi:
            continue
        _, py = to_px(0.0, 10.0 ** exp)
        parts.append(_line(x0, py, x1, py, "#ddd"))
        parts.append(_text(x0 - 8, py + 4, f"1e{exp}", anchor="end"))
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        px = x0 + frac * (x1 - x0)
        parts.append(_line(px, y1, px, y1 + 4, "#333"))
        parts.append(_text(px, y1 + 18, f"{frac * xmax:.1f}"))
    parts.append(_text((x0 + x1) / 2, HEIGHT - 14, xlabel))
    parts.append(_text(18, (y0 + y1) / 2, "error [m], log scale", rotate=-90.0))

    for i, (method, (sx, sy)) in enumerate(sorted(nonempty.items())):
        color = PALETTE[i % len(PALETTE)]
        for px_val, py_val in zip(sx, sy):
            px, py = to_px(float(px_val), float(py_val))
            parts.append(_circle(px, py, 3.0, color))
        fit = fits.get(method)
        if fit is not None:
            line_pts = []
            for x_val in np.linspace(0.0, xmax, 50):
                y_val = fit.eps0 + fit.alpha * x_val
                if y_val > 0:
                    line_pts.append(to_px(float(x_val), float(y_val)))
            if len(line_pts) >= 2:
                parts.append(_polyline(line_pts, color, 1.2))
        parts.append(_text(x1 - 8, y0 + 16 + 16 * i, method, anchor="end"))
        parts.append(_line(x1 - 70, y0 + 12 + 16 * i, x1 - 56, y0 + 12 + 16 * i,
                           color, 3.0))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
