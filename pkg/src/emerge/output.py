"""CSV and SVG writers for trajectory tables (no plotting dependency)."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_csv(columns: Mapping[str, Sequence[float]]) -> str:
    """``step,<name>...`` header and one row per step, 17 significant digits."""
    names = list(columns)
    data = [np.asarray(columns[n], dtype=float) for n in names]
    rows = ["step," + ",".join(names)]
    for k in range(len(data[0])):
        rows.append(",".join([str(k)] + [fmt17(col[k]) for col in data]))
    return "\n".join(rows) + "\n"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = np.ceil(lo / step) * step
    return [float(t) for t in np.arange(first, hi + step * 1e-9, step)]


def _panel(title: str, columns: Mapping[str, Sequence[float]], x0: float, width: float, height: float) -> list[str]:
    left, right, top, bottom = 50.0, 10.0, 30.0, 40.0
    pw, ph = width - left - right, height - top - bottom
    data = {k: np.asarray(v, dtype=float) for k, v in columns.items()}
    n = max(len(v) for v in data.values())
    ymin = min(0.0, min(float(v.min()) for v in data.values()))
    ymax = max(float(v.max()) for v in data.values())
    if ymax <= ymin:
        ymax = ymin + 1.0

    def X(k):
        return x0 + left + pw * k / max(1, n - 1)

    def Y(y):
        return top + ph * (1.0 - (y - ymin) / (ymax - ymin))

    out = [f'<text x="{x0 + left + pw / 2:.2f}" y="18" text-anchor="middle">{title}</text>',
           f'<rect x="{x0 + left:.2f}" y="{top:.2f}" width="{pw:.2f}" height="{ph:.2f}" fill="none" stroke="#444"/>']
    for t in _nice_ticks(0, n - 1):
        out.append(f'<line x1="{X(t):.2f}" y1="{top + ph:.2f}" x2="{X(t):.2f}" y2="{top + ph + 4:.2f}" stroke="#444"/>')
        out.append(f'<text x="{X(t):.2f}" y="{top + ph + 16:.2f}" text-anchor="middle" font-size="10">{t:g}</text>')
    for t in _nice_ticks(ymin, ymax):
        out.append(f'<line x1="{x0 + left - 4:.2f}" y1="{Y(t):.2f}" x2="{x0 + left:.2f}" y2="{Y(t):.2f}" stroke="#444"/>')
        out.append(f'<text x="{x0 + left - 6:.2f}" y="{Y(t) + 3:.2f}" text-anchor="end" font-size="10">{t:g}</text>')
    for i, (name, v) in enumerate(data.items()):
        pts = " ".join(f"{X(k):.2f},{Y(y):.2f}" for k, y in enumerate(v))
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="{x0 + left + 6:.2f}" y="{top + 14 + 12 * i:.2f}" font-size="10" fill="{color}">{name}</text>')
    return out


def trajectory_svg(panels: Sequence[tuple[str, Mapping[str, Sequence[float]]]], width: float = 420.0, height: float = 300.0) -> str:
    """Side-by-side line charts of log e-processes, one panel per (title, columns)."""
    total = width * len(panels)
    body = []
    for i, (title, cols) in enumerate(panels):
        body += _panel(title, cols, i * width, width, height)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{total:.0f}" height="{height:.0f}" '
            f'viewBox="0 0 {total:.0f} {height:.0f}" font-family="sans-serif">')
    return "\n".join([head, *body, "</svg>"]) + "\n"
