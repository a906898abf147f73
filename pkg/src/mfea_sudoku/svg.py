"""Minimal standalone SVG line charts."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 20, 40, 55


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    magnitude = 10 ** np.floor(np.log10(raw))
    step = min((m * magnitude for m in (1, 2, 2.5, 5, 10) if m * magnitude >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + step * 1e-9, step)]


def _fmt(value: float) -> str:
    if value == int(value) and abs(value) >= 1:
        return f"{int(value)}"
    return f"{value:g}"


def line_chart(series, title: str, x_label: str, y_label: str, y_range=None, legend: str = "upper right") -> str:
    """Render ``series`` (a list of ``(label, xs, ys)``) as one polyline each."""
    if not series:
        raise ValueError("line_chart needs at least one series")
    xs_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    x_lo, x_hi = float(xs_all.min()), float(xs_all.max())
    if y_range is None:
        ys_all = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
        y_range = (float(ys_all.min()), float(ys_all.max()))
    y_lo, y_hi = y_range
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x):
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        y = min(max(y, y_lo), y_hi)
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<g class="axes" stroke="black" fill="none">'
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}"/></g>',
    ]
    out.append(f'<g class="y-axis" data-min="{_fmt(y_lo)}" data-max="{_fmt(y_hi)}">')
    for t in _ticks(y_lo, y_hi):
        y = sy(t)
        out.append(f'<line x1="{MARGIN_LEFT - 4}" y1="{y:.1f}" x2="{MARGIN_LEFT}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_LEFT - 7}" y="{y + 4:.1f}" text-anchor="end">{_fmt(t)}</text>')
    out.append("</g>")
    out.append(f'<g class="x-axis" data-min="{_fmt(x_lo)}" data-max="{_fmt(x_hi)}">')
    for t in _ticks(x_lo, x_hi):
        x = sx(t)
        bottom = MARGIN_TOP + plot_h
        out.append(f'<line x1="{x:.1f}" y1="{bottom}" x2="{x:.1f}" y2="{bottom + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{bottom + 18}" text-anchor="middle">{_fmt(t)}</text>')
    out.append("</g>")
    out.append(f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.1f})">{escape(y_label)}</text>'
    )
    for i, (label, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        points = " ".join(f"{sx(float(x)):.1f},{sy(float(y)):.1f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"><title>{escape(label)}</title></polyline>')
    out.append('<g class="legend">')
    for i, (label, _, _) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        if legend == "lower right":
            y = MARGIN_TOP + plot_h - 14 - 18 * (len(series) - 1 - i)
        else:
            y = MARGIN_TOP + 14 + 18 * i
        x = WIDTH - MARGIN_RIGHT - 130
        out.append(
            f'<g class="legend-entry"><line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{color}" stroke-width="2"/>'
            f'<text x="{x + 26}" y="{y + 4}">{escape(label)}</text></g>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
