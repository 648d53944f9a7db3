"""Minimal deterministic SVG line charts for profile series."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

from .profiles import ProfileSeries

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
STEP_COLORS = ("#e377c2", "#17becf", "#bcbd22", "#7f7f7f")


def _f(x: float) -> str:
    return f"{x:.2f}"


def render_profiles_svg(profiles: Sequence[ProfileSeries], title: str = "",
                        width: int = 800, height: int = 400) -> str:
    """Render profiles as polylines over window index, with dashed step boundaries.

    Output depends only on the inputs: element order follows ``profiles``
    and every coordinate is printed with two decimals.
    """
    left, right, top, bottom = 60, 20, 30, 40
    plot_w = width - left - right
    plot_h = height - top - bottom
    x_max = max((len(p.points) for p in profiles), default=1)
    x_max = max(x_max - 1, 1)
    y_max = max((pt.mean_mv for p in profiles for pt in p.points), default=1.0)
    y_max = y_max if y_max > 0 else 1.0

    def sx(i: float) -> float:
        return left + plot_w * i / x_max

    def sy(v: float) -> float:
        return top + plot_h * (1.0 - v / y_max)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.2f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 8}" text-anchor="middle" '
        f'font-size="12">window index</text>',
        f'<text x="14" y="{top + plot_h / 2:.2f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {top + plot_h / 2:.2f})">mV</text>',
        f'<text x="{left - 4}" y="{top + 4}" text-anchor="end" font-size="10">{_f(y_max)}</text>',
        f'<text x="{left - 4}" y="{top + plot_h}" text-anchor="end" font-size="10">0</text>',
    ]
    boundaries = next((p.step_boundaries for p in profiles if p.step_boundaries), ())
    for step, idx in boundaries:
        color = STEP_COLORS[(step - 1) % len(STEP_COLORS)]
        x = _f(sx(idx))
        out.append(f'<line x1="{x}" y1="{top}" x2="{x}" y2="{top + plot_h}" stroke="{color}" '
                   f'stroke-dasharray="4 3"/>')
        out.append(f'<text x="{x}" y="{top - 4}" text-anchor="middle" font-size="10" '
                   f'fill="{color}">step {step}</text>')
    for k, prof in enumerate(profiles):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_f(sx(p.window_index))},{_f(sy(p.mean_mv))}" for p in prof.points)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{left + plot_w - 4}" y="{top + 14 * (k + 1)}" text-anchor="end" '
                   f'font-size="11" fill="{color}">S{prof.sensor_id}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
