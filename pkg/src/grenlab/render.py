"""Static SVG rendering of experiment reports: histogram and QQ plot.

Hand-built SVG keeps the bytes deterministic (no timestamps, no library
version markers), which makes snapshot tests possible.
"""

from __future__ import annotations

import numpy as np

from grenlab._common import ConfigError
from grenlab.stats import normal_quantiles

__all__ = ["render_report"]

WIDTH, HEIGHT = 900, 420
PANEL_W, PANEL_H = 380, 320
MARGIN_X, MARGIN_Y = 60, 50
KS99 = 1.6276  # Kolmogorov 99% critical coefficient


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def _line(x1, y1, x2, y2, style: str) -> str:
    return f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" {style}/>'


def _text(x, y, s: str, anchor="middle", size=12) -> str:
    return f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" font-family="sans-serif" text-anchor="{anchor}">{s}</text>'


def _panel_axes(ox: float, title: str) -> list:
    style = 'stroke="#222" stroke-width="1"'
    return [
        _line(ox, MARGIN_Y + PANEL_H, ox + PANEL_W, MARGIN_Y + PANEL_H, style),
        _line(ox, MARGIN_Y, ox, MARGIN_Y + PANEL_H, style),
        _text(ox + PANEL_W / 2, MARGIN_Y - 14, title),
    ]


def _extract_t_values(report: dict) -> np.ndarray:
    cols = report.get("raw_columns", [])
    rows = report.get("raw_rows", [])
    if "T" in cols:
        idx = cols.index("T")
    elif rows and len(cols) >= 3:
        idx = len(cols) - 1
    else:
        return np.array([])
    if not rows:
        return np.array([])
    arr = np.array([r for r in rows], dtype=object)
    # keep only the largest n (closest to the limit law)
    ns = np.array([r[0] for r in rows], dtype=float)
    vals = np.array([r[idx] for r in rows], dtype=float)
    return vals[ns == ns.max()]


def render_report(report: dict) -> str:
    """Deterministic SVG with a histogram of the standardized statistic
    overlaid with the standard normal density, and a QQ plot against normal
    quantiles with a 99% KS band."""
    if report.get("report_version") != 1:
        raise ConfigError(f"unsupported report version {report.get('report_version')!r}")
    t = _extract_t_values(report)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    ox1, ox2 = MARGIN_X, MARGIN_X + PANEL_W + 80
    parts += _panel_axes(ox1, "standardized statistic vs N(0,1)")
    parts += _panel_axes(ox2, "QQ plot vs normal quantiles")
    if t.size == 0:
        parts.append(_text(WIDTH / 2, HEIGHT / 2, "no data"))
        parts.append("</svg>")
        return "".join(parts)

    # left panel: histogram with normal overlay
    spread = float(t.max() - t.min())
    lo = min(-3.5, float(t.min())) - 0.1
    hi = max(3.5, float(t.max())) + 0.1
    n_bins = 1 if spread == 0.0 else 40
    counts, edges = np.histogram(t, bins=n_bins, range=(lo, hi))
    density = counts / (t.size * (edges[1] - edges[0]))
    y_max = max(float(density.max()), 0.45)
    sx = PANEL_W / (hi - lo)
    sy = PANEL_H / y_max

    def hx(v):
        return ox1 + (v - lo) * sx

    def hy(v):
        return MARGIN_Y + PANEL_H - v * sy

    for j, dens in enumerate(density):
        if dens <= 0:
            continue
        x0, x1 = hx(edges[j]), hx(edges[j + 1])
        y0 = hy(dens)
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
            f'height="{_fmt(MARGIN_Y + PANEL_H - y0)}" fill="#7aa6d6" stroke="none"/>'
        )
    grid = np.linspace(lo, hi, 121)
    pdf = np.exp(-0.5 * grid ** 2) / np.sqrt(2.0 * np.pi)
    pts = " ".join(f"{_fmt(hx(g))},{_fmt(hy(p))}" for g, p in zip(grid, pdf))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#c0392b" stroke-width="1.5"/>')

    # right panel: QQ plot with 99% KS band
    t_sorted = np.sort(t)
    probs = (np.arange(1, t.size + 1) - 0.5) / t.size
    theo = normal_quantiles(probs)
    band = KS99 / np.sqrt(t.size)
    q_lo = normal_quantiles(np.clip(probs - band, 1e-12, 1 - 1e-12))
    q_hi = normal_quantiles(np.clip(probs + band, 1e-12, 1 - 1e-12))
    q_min, q_max = float(theo[0]) - 1.0, float(theo[-1]) + 1.0
    v_min = min(q_min, float(t_sorted[0]))
    v_max = max(q_max, float(t_sorted[-1]))

    def qx(v):
        return ox2 + (v - q_min) / (q_max - q_min) * PANEL_W

    def qy(v):
        return MARGIN_Y + PANEL_H - (v - v_min) / (v_max - v_min) * PANEL_H

    band_pts = " ".join(f"{_fmt(qx(a))},{_fmt(qy(b))}" for a, b in zip(theo, q_hi))
    band_pts_back = " ".join(f"{_fmt(qx(a))},{_fmt(qy(b))}" for a, b in zip(theo[::-1], q_lo[::-1]))
    parts.append(f'<polygon points="{band_pts} {band_pts_back}" fill="#f3d9a4" stroke="none" opacity="0.8"/>')
    parts.append(_line(qx(max(q_min, v_min)), qy(max(q_min, v_min)), qx(min(q_max, v_max)), qy(min(q_max, v_max)), 'stroke="#888" stroke-width="1" stroke-dasharray="4 3"'))
    step = max(1, t.size // 400)
    for a, b in zip(theo[::step], t_sorted[::step]):
        parts.append(f'<circle cx="{_fmt(qx(a))}" cy="{_fmt(qy(b))}" r="1.6" fill="#2c3e50"/>')
    parts.append(_text(ox2 + PANEL_W / 2, MARGIN_Y + PANEL_H + 32, "theoretical quantiles", size=11))
    parts.append("</svg>")
    return "".join(parts)
