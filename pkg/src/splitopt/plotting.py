"""Self-contained SVG line charts with a logarithmic y axis.

No plotting dependency: the chart is assembled as SVG 1.1 text with fixed
float formatting, so identical inputs yield identical bytes.  Points with
non-finite or nonpositive y are dropped (log scale); series that lose all
their points are skipped but keep their legend entry.
"""

import math
from dataclasses import dataclass

from .errors import EmptyTrace

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 24, 40, 56

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


@dataclass
class Series:
    label: str
    xs: list
    ys: list
    color: str | None = None  # palette by position when unset


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list:
    """Round tick positions covering [lo, hi] with a 1/2/5 step."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_line_chart(
    series: list,
    x_label: str,
    y_label: str,
    title: str = "",
) -> str:
    """Render series as a log-y SVG chart; deterministic bytes."""
    if not series:
        raise EmptyTrace("no series to plot")
    drawable = []
    for s in series:
        pts = [
            (float(x), float(y))
            for x, y in zip(s.xs, s.ys)
            if math.isfinite(float(x)) and math.isfinite(float(y)) and float(y) > 0
        ]
        drawable.append(pts)

    all_pts = [p for pts in drawable for p in pts]
    if all_pts:
        x_lo = min(p[0] for p in all_pts)
        x_hi = max(p[0] for p in all_pts)
        y_lo = min(p[1] for p in all_pts)
        y_hi = max(p[1] for p in all_pts)
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.1, 10.0
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    dec_lo = math.floor(math.log10(y_lo))
    dec_hi = math.ceil(math.log10(y_hi))
    if dec_hi <= dec_lo:
        dec_hi = dec_lo + 1

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        frac = (math.log10(y) - dec_lo) / (dec_hi - dec_lo)
        return MARGIN_T + (1.0 - frac) * plot_h

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    if title:
        out.append(
            f'<text x="{WIDTH / 2:.0f}" y="24" font-family="sans-serif" '
            f'font-size="15" text-anchor="middle">{_esc(title)}</text>'
        )

    # Axes box.
    out.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )

    # y ticks: one per decade (thinned when there are many decades).
    decades = list(range(dec_lo, dec_hi + 1))
    stride = max(1, (len(decades) - 1) // 8)
    for d in decades[::stride]:
        y = py(10.0**d)
        out.append(
            f'<line x1="{MARGIN_L}" y1="{_fmt(y)}" x2="{WIDTH - MARGIN_R}" '
            f'y2="{_fmt(y)}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{MARGIN_L - 6}" y="{_fmt(y + 4)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">1e{d}</text>'
        )
    for t in _nice_ticks(x_lo, x_hi):
        x = px(t)
        out.append(
            f'<line x1="{_fmt(x)}" y1="{HEIGHT - MARGIN_B}" x2="{_fmt(x)}" '
            f'y2="{HEIGHT - MARGIN_B + 4}" stroke="black" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(x)}" y="{HEIGHT - MARGIN_B + 18}" '
            f'font-family="sans-serif" font-size="11" text-anchor="middle">{t:g}</text>'
        )

    out.append(
        f'<text x="{MARGIN_L + plot_w / 2:.0f}" y="{HEIGHT - 12}" '
        f'font-family="sans-serif" font-size="13" text-anchor="middle">'
        f"{_esc(x_label)}</text>"
    )
    out.append(
        f'<text x="16" y="{MARGIN_T + plot_h / 2:.0f}" font-family="sans-serif" '
        f'font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_T + plot_h / 2:.0f})">{_esc(y_label)}</text>'
    )

    # Series polylines, clipped to the axes box.
    out.append(
        f'<clipPath id="plot"><rect x="{MARGIN_L}" y="{MARGIN_T}" '
        f'width="{plot_w}" height="{plot_h}"/></clipPath>'
    )
    legend_slot = 0
    for i, (s, pts) in enumerate(zip(series, drawable)):
        color = s.color or PALETTE[i % len(PALETTE)]
        if pts:
            coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="1.5" clip-path="url(#plot)"/>'
            )
        if not s.label:  # unlabeled series (e.g. repeat runs) share a legend entry
            continue
        ly = MARGIN_T + 14 + 16 * legend_slot
        lx = WIDTH - MARGIN_R - 150
        legend_slot += 1
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{_esc(s.label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )
