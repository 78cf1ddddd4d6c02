"""Minimal self-contained SVG line charts for the CLI's --plot output.

Plot emission never feeds back into numeric artifacts; the charts exist so a
run can be eyeballed without any plotting stack installed.
"""

from __future__ import annotations

_PALETTE = ["#1f6fb2", "#d1495b", "#3f8f4e", "#8f6fc2", "#c2863f", "#47a3a3"]
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 40, 55


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_chart(
    series: list[tuple[str, list[float], list[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
) -> str:
    """Render named (x, y) series into an SVG document string."""
    xs = [v for _, sx, _ in series for v in sx]
    ys = [v for _, _, sy in series for v in sy]
    if not xs:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(x):
        return _ML + plot_w * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        return _MT + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444"/>',
    ]
    for tx in _ticks(x_lo, x_hi):
        parts.append(
            f'<line x1="{px(tx):.1f}" y1="{_MT + plot_h}" x2="{px(tx):.1f}" '
            f'y2="{_MT + plot_h + 5}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{px(tx):.1f}" y="{_MT + plot_h + 18}" '
            f'text-anchor="middle">{tx:.3g}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py(ty):.1f}" x2="{_ML}" '
            f'y2="{py(ty):.1f}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{py(ty) + 4:.1f}" text-anchor="end">{ty:.3g}</text>'
        )
    parts.append(
        f'<text x="{_ML + plot_w / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{_MT + plot_h / 2}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_MT + plot_h / 2})">{ylabel}</text>'
    )
    for i, (label, sx, sy) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(sx, sy))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MT + 16 + 16 * i
        parts.append(f'<line x1="{_ML + 8}" y1="{ly - 4}" x2="{_ML + 28}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_ML + 34}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
