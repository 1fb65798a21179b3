"""Minimal static SVG line charts.

Deliberately tiny: axes, ticks, polylines or point markers, and a legend.
Output is deterministic (pure text, no timestamps or random ids), which
keeps emitted artifacts reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a",
]

_WIDTH, _HEIGHT = 880, 500
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 160, 40, 50


@dataclass
class Series:
    name: str
    x: list[float]
    y: list[float]
    markers: bool = False  # draw points instead of a connected line


@dataclass
class LineChart:
    title: str
    x_label: str
    y_label: str
    series: list[Series] = field(default_factory=list)

    def add(self, name: str, x: list[float], y: list[float], markers: bool = False) -> None:
        self.series.append(Series(name, list(x), list(y), markers))

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.render())

    def render(self) -> str:
        xs = [v for s in self.series for v in s.x]
        ys = [v for s in self.series for v in s.y]
        x_min, x_max = (min(xs), max(xs)) if xs else (0.0, 1.0)
        y_min, y_max = (min(ys), max(ys)) if ys else (0.0, 1.0)
        if x_max == x_min:
            x_max = x_min + 1.0
        if y_max == y_min:
            y_max = y_min + 1.0
        pad = 0.04 * (y_max - y_min)
        y_min, y_max = y_min - pad, y_max + pad

        plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
        plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

        def px(x: float) -> float:
            return _MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w

        def py(y: float) -> float:
            return _MARGIN_T + plot_h - (y - y_min) / (y_max - y_min) * plot_h

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
            f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="monospace" font-size="12">',
            f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
            f'<text x="{_WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="15">'
            f"{_esc(self.title)}</text>",
        ]

        # Axes box and ticks.
        out.append(
            f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
            'fill="none" stroke="#333" stroke-width="1"/>'
        )
        for k in range(5):
            fx = x_min + k * (x_max - x_min) / 4
            fy = y_min + k * (y_max - y_min) / 4
            out.append(
                f'<line x1="{px(fx):.1f}" y1="{_MARGIN_T + plot_h}" x2="{px(fx):.1f}" '
                f'y2="{_MARGIN_T + plot_h + 5}" stroke="#333"/>'
            )
            out.append(
                f'<text x="{px(fx):.1f}" y="{_MARGIN_T + plot_h + 18}" '
                f'text-anchor="middle">{_fmt(fx)}</text>'
            )
            out.append(
                f'<line x1="{_MARGIN_L - 5}" y1="{py(fy):.1f}" x2="{_MARGIN_L}" '
                f'y2="{py(fy):.1f}" stroke="#333"/>'
            )
            out.append(
                f'<text x="{_MARGIN_L - 8}" y="{py(fy) + 4:.1f}" '
                f'text-anchor="end">{_fmt(fy)}</text>'
            )
        out.append(
            f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_HEIGHT - 10}" '
            f'text-anchor="middle">{_esc(self.x_label)}</text>'
        )
        out.append(
            f'<text x="16" y="{_MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {_MARGIN_T + plot_h / 2:.1f})">{_esc(self.y_label)}</text>'
        )

        # Series and legend.
        for idx, s in enumerate(self.series):
            color = _PALETTE[idx % len(_PALETTE)]
            if s.markers:
                for x, y in zip(s.x, s.y):
                    out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.4" fill="{color}"/>')
            elif s.x:
                pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(s.x, s.y))
                out.append(
                    f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.3"/>'
                )
            ly = _MARGIN_T + 14 * idx
            lx = _MARGIN_L + plot_w + 12
            out.append(f'<rect x="{lx}" y="{ly}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{lx + 15}" y="{ly + 9}">{_esc(s.name)}</text>')

        out.append("</svg>")
        return "\n".join(out) + "\n"


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1000 or abs(v) < 0.01:
        return f"{v:.2e}"
    return f"{v:.3g}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
