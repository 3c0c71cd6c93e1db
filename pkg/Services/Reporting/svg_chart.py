"""
SVG line charts written as text: convergence curves (log-x, mean line with a
min/max band across seeds) and the tradeoff frontier with its analytic bands.
Output is a pure function of the inputs.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

from Common.errors import SpecValidationError

WIDTH, HEIGHT = 720, 440
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 160, 40, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


@dataclass
class Line:
    label: str
    xs: Sequence[float]
    ys: Sequence[Optional[float]]
    lower: Optional[Sequence[Optional[float]]] = None
    upper: Optional[Sequence[Optional[float]]] = None
    dashed: bool = False


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _tick_label(value: float) -> str:
    return f"{value:.4g}"


def aggregate_runs(series_list: List[dict], column: str) -> Line:
    """Mean line with min/max band of one column across runs sharing the same grid"""
    if not series_list:
        raise SpecValidationError("Nothing to aggregate")
    grid = series_list[0]["t"]
    if any(series["t"] != grid for series in series_list):
        raise SpecValidationError("Runs to aggregate must share the same round grid")
    if any(column not in series for series in series_list):
        raise SpecValidationError(f"Column '{column}' missing from some runs")
    means, lows, highs = [], [], []
    for i in range(len(grid)):
        values = [series[column][i] for series in series_list if series[column][i] is not None]
        if values:
            means.append(float(np.mean(values)))
            lows.append(float(min(values)))
            highs.append(float(max(values)))
        else:
            means.append(None)
            lows.append(None)
            highs.append(None)
    if len(series_list) == 1:
        return Line(column, grid, means)
    return Line(column, grid, means, lows, highs)


class _Axes:

    def __init__(self, lines: Sequence[Line], log_x: bool):
        self.log_x = log_x
        xs = [x for line in lines for x in line.xs if not log_x or x > 0]
        ys = [y for line in lines for values in (line.ys, line.lower, line.upper) if values
              for y in values if y is not None and math.isfinite(y)]
        if not xs or not ys:
            raise SpecValidationError("No plottable points")
        self.x_min, self.x_max = self._span([self._x(x) for x in xs])
        self.y_min, self.y_max = self._span(ys)

    @staticmethod
    def _span(values: List[float]) -> Tuple[float, float]:
        low, high = min(values), max(values)
        if high - low < 1e-12:
            low, high = low - 0.5, high + 0.5
        return low, high

    def _x(self, x: float) -> float:
        return math.log10(x) if self.log_x else x

    def px(self, x: float) -> float:
        span = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        return MARGIN_LEFT + span * (self._x(x) - self.x_min) / (self.x_max - self.x_min)

    def py(self, y: float) -> float:
        span = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        return HEIGHT - MARGIN_BOTTOM - span * (y - self.y_min) / (self.y_max - self.y_min)

    def x_ticks(self) -> List[float]:
        if self.log_x:
            return [10.0 ** k for k in range(math.ceil(self.x_min), math.floor(self.x_max) + 1)]
        return list(np.linspace(self.x_min, self.x_max, 5))

    def y_ticks(self) -> List[float]:
        return list(np.linspace(self.y_min, self.y_max, 5))


def _polyline(axes: _Axes, xs, ys) -> List[str]:
    """Polylines split at undefined points"""
    segments, current = [], []
    for x, y in zip(xs, ys):
        if y is None or not math.isfinite(y) or (axes.log_x and x <= 0):
            if current:
                segments.append(current)
            current = []
            continue
        current.append(f"{_fmt(axes.px(x))},{_fmt(axes.py(y))}")
    if current:
        segments.append(current)
    return [" ".join(segment) for segment in segments]


def _band(axes: _Axes, xs, lower, upper) -> Optional[str]:
    points = [(x, lo, hi) for x, lo, hi in zip(xs, lower, upper)
              if lo is not None and hi is not None and (not axes.log_x or x > 0)]
    if len(points) < 2:
        return None
    top = [f"{_fmt(axes.px(x))},{_fmt(axes.py(hi))}" for x, _, hi in points]
    bottom = [f"{_fmt(axes.px(x))},{_fmt(axes.py(lo))}" for x, lo, _ in reversed(points)]
    return " ".join(top + bottom)


def line_chart_svg(lines: Sequence[Line], title: str = "", x_label: str = "t", y_label: str = "",
                   log_x: bool = True) -> str:
    axes = _Axes(lines, log_x)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
    ]
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>')
    for tick in axes.x_ticks():
        x = _fmt(axes.px(tick))
        out.append(f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{bottom + 18}" text-anchor="middle" font-size="11">'
                   f'{_tick_label(tick)}</text>')
    for tick in axes.y_ticks():
        y = _fmt(axes.py(tick))
        out.append(f'<line x1="{left - 5}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y}" text-anchor="end" font-size="11">{_tick_label(tick)}</text>')
    out.append(f'<text x="{(left + right) // 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">'
               f'{escape(x_label + (" (log scale)" if log_x else ""))}</text>')
    out.append(f'<text x="16" y="{(top + bottom) // 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {(top + bottom) // 2})">{escape(y_label)}</text>')

    for index, line in enumerate(lines):
        color = PALETTE[index % len(PALETTE)]
        if line.lower is not None and line.upper is not None:
            band = _band(axes, line.xs, line.lower, line.upper)
            if band:
                out.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        dash = ' stroke-dasharray="6,4"' if line.dashed else ""
        for points in _polyline(axes, line.xs, line.ys):
            out.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>')
        legend_y = top + 18 * index + 10
        out.append(f'<line x1="{right + 12}" y1="{legend_y}" x2="{right + 36}" y2="{legend_y}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{right + 42}" y="{legend_y + 4}" font-size="11">{escape(line.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def frontier_svg(deltas: Sequence[float], measured: Sequence[Optional[float]],
                 band_lower: Sequence[float], band_upper: Sequence[float], title: str) -> str:
    lines = [
        Line("analytic band", deltas, band_lower, band_lower, band_upper, dashed=True),
        Line("measured GC", deltas, measured),
    ]
    return line_chart_svg(lines, title=title, x_label="delta (DP budget)", y_label="group calibration error",
                          log_x=False)
