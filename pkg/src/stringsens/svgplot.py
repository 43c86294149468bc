"""Minimal self-contained SVG rendering of sensitivity sweeps.

One polyline per network size on a log-frequency axis, with labeled decade
ticks.  No external references, scripts, or fonts beyond the generic
``sans-serif`` family, so the file renders identically everywhere.
"""

from __future__ import annotations

import math

import numpy as np

_WIDTH, _HEIGHT = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 30, 50
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
            "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _decade_label(exponent: int) -> str:
    return f"1e{exponent:d}"


def render_sweep_svg(sweeps, title: str = "") -> str:
    """Render ln|S_N(jw)| against log10(w) for a list of SweepResult."""
    xs, ys = [], []
    for sw in sweeps:
        finite = np.isfinite(sw.log_mags) & (sw.omegas > 0)
        xs.append(np.log10(sw.omegas[finite]))
        ys.append(sw.log_mags[finite])
    if not xs or all(len(x) == 0 for x in xs):
        raise ValueError("nothing to plot: all sweep points are gaps")

    x_lo = min(float(np.min(x)) for x in xs if len(x))
    x_hi = max(float(np.max(x)) for x in xs if len(x))
    y_lo = min(float(np.min(y)) for y in ys if len(y))
    y_hi = max(float(np.max(y)) for y in ys if len(y))
    if x_hi - x_lo < 1e-12:
        x_hi = x_lo + 1.0
    pad = 0.05 * max(y_hi - y_lo, 1e-6)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = _WIDTH - _ML - _MR
    plot_h = _HEIGHT - _MT - _MB

    def px(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return _MT + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{_WIDTH // 2}" y="{_MT - 10}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{title}</text>')

    # Decade ticks on the frequency axis.
    for e in range(math.ceil(x_lo - 1e-9), math.floor(x_hi + 1e-9) + 1):
        x = px(e)
        parts.append(f'<line x1="{_fmt(x)}" y1="{_MT + plot_h}" x2="{_fmt(x)}" '
                     f'y2="{_MT + plot_h + 6}" stroke="black"/>')
        parts.append(f'<line x1="{_fmt(x)}" y1="{_MT}" x2="{_fmt(x)}" '
                     f'y2="{_MT + plot_h}" stroke="#dddddd" stroke-width="0.5"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{_MT + plot_h + 20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="12">{_decade_label(e)}</text>')
    parts.append(f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 12}" text-anchor="middle" '
                 'font-family="sans-serif" font-size="13">omega (rad/s)</text>')

    # Five evenly spaced ticks on the magnitude axis.
    for i in range(5):
        y = y_lo + i * (y_hi - y_lo) / 4
        ypix = py(y)
        parts.append(f'<line x1="{_ML - 6}" y1="{_fmt(ypix)}" x2="{_ML}" '
                     f'y2="{_fmt(ypix)}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 10}" y="{_fmt(ypix + 4)}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="12">{y:.2f}</text>')
    parts.append(f'<text x="16" y="{_MT + plot_h // 2}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13" '
                 f'transform="rotate(-90 16 {_MT + plot_h // 2})">ln |S_N(jw)|</text>')

    # Zero line if it is inside the range.
    if y_lo < 0.0 < y_hi:
        y0 = py(0.0)
        parts.append(f'<line x1="{_ML}" y1="{_fmt(y0)}" x2="{_ML + plot_w}" '
                     f'y2="{_fmt(y0)}" stroke="#999999" stroke-width="0.8" '
                     'stroke-dasharray="4 3"/>')

    for idx, (sw, x, y) in enumerate(zip(sweeps, xs, ys)):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{_fmt(px(xi))},{_fmt(py(yi))}" for xi, yi in zip(x, y))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     'stroke-width="1.5"/>')
        ly = _MT + 18 + 16 * idx
        parts.append(f'<line x1="{_ML + plot_w - 120}" y1="{ly - 4}" '
                     f'x2="{_ML + plot_w - 95}" y2="{ly - 4}" stroke="{color}" '
                     'stroke-width="2"/>')
        parts.append(f'<text x="{_ML + plot_w - 90}" y="{ly}" '
                     f'font-family="sans-serif" font-size="12">N={sw.n}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_sweep_svg(path, sweeps, title: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_sweep_svg(sweeps, title))
