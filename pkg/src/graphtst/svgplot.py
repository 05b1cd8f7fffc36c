"""Minimal static SVG charts: axes, series, legend, nothing interactive.

Charts are assembled as plain strings so plots stay a pure function of the
tabular data handed in.
"""

import math
from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np
from scipy.stats import gaussian_kde

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

WIDTH = 640
HEIGHT = 420
MARGIN_LEFT = 70
MARGIN_RIGHT = 18
MARGIN_TOP = 34
MARGIN_BOTTOM = 54


@dataclass
class Series:
    """One plotted series; ``filled`` only matters for scatter markers."""

    x: np.ndarray
    y: np.ndarray
    label: str = ""
    color: Optional[str] = None
    filled: bool = True


def _nice_ticks(lo: float, hi: float, target: int = 5):
    if not math.isfinite(lo) or not math.isfinite(hi):
        raise ValueError("cannot place ticks on a non-finite range")
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    magnitude = 10.0 ** math.floor(math.log10(span / target))
    step = magnitude
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * magnitude
        if span / step <= target:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(value) < 1e-12 * span else value)
        value += step
    return ticks


def _data_range(values, pad_frac: float = 0.05):
    lo = float(min(values))
    hi = float(max(values))
    if hi <= lo:
        lo -= 0.5
        hi += 0.5
    pad = pad_frac * (hi - lo)
    return lo - pad, hi + pad


def _fmt_tick(value: float) -> str:
    text = "%.6g" % value
    return "0" if text == "-0" else text


class _Frame:
    """Maps data coordinates into the pixel box and renders the chrome."""

    def __init__(self, x_range, y_range, width, height):
        self.x_lo, self.x_hi = x_range
        self.y_lo, self.y_hi = y_range
        self.width = width
        self.height = height
        self.px_lo = MARGIN_LEFT
        self.px_hi = width - MARGIN_RIGHT
        self.py_lo = height - MARGIN_BOTTOM
        self.py_hi = MARGIN_TOP

    def x(self, value):
        frac = (value - self.x_lo) / (self.x_hi - self.x_lo)
        return self.px_lo + frac * (self.px_hi - self.px_lo)

    def y(self, value):
        frac = (value - self.y_lo) / (self.y_hi - self.y_lo)
        return self.py_lo + frac * (self.py_hi - self.py_lo)

    def chrome(self, title, x_label, y_label):
        parts = [
            '<rect x="%g" y="%g" width="%g" height="%g" fill="none" '
            'stroke="#333" stroke-width="1"/>'
            % (self.px_lo, self.py_hi, self.px_hi - self.px_lo,
               self.py_lo - self.py_hi)]
        for tick in _nice_ticks(self.x_lo, self.x_hi):
            if tick < self.x_lo or tick > self.x_hi:
                continue
            px = self.x(tick)
            parts.append('<line x1="%g" y1="%g" x2="%g" y2="%g" '
                         'stroke="#333"/>' % (px, self.py_lo, px, self.py_lo + 5))
            parts.append('<text x="%g" y="%g" font-size="11" '
                         'text-anchor="middle" fill="#333">%s</text>'
                         % (px, self.py_lo + 18, _fmt_tick(tick)))
        for tick in _nice_ticks(self.y_lo, self.y_hi):
            if tick < self.y_lo or tick > self.y_hi:
                continue
            py = self.y(tick)
            parts.append('<line x1="%g" y1="%g" x2="%g" y2="%g" '
                         'stroke="#333"/>' % (self.px_lo - 5, py, self.px_lo, py))
            parts.append('<text x="%g" y="%g" font-size="11" '
                         'text-anchor="end" fill="#333">%s</text>'
                         % (self.px_lo - 8, py + 4, _fmt_tick(tick)))
        if title:
            parts.append('<text x="%g" y="%g" font-size="14" '
                         'text-anchor="middle" fill="#111">%s</text>'
                         % ((self.px_lo + self.px_hi) / 2, MARGIN_TOP - 12,
                            escape(title)))
        if x_label:
            parts.append('<text x="%g" y="%g" font-size="12" '
                         'text-anchor="middle" fill="#111">%s</text>'
                         % ((self.px_lo + self.px_hi) / 2, self.height - 14,
                            escape(x_label)))
        if y_label:
            mid_y = (self.py_lo + self.py_hi) / 2
            parts.append('<text x="16" y="%g" font-size="12" '
                         'text-anchor="middle" fill="#111" '
                         'transform="rotate(-90 16 %g)">%s</text>'
                         % (mid_y, mid_y, escape(y_label)))
        return parts

    def legend(self, labeled):
        parts = []
        x0 = self.px_lo + 10
        y0 = self.py_hi + 14
        for k, (label, color, filled) in enumerate(labeled):
            py = y0 + 16 * k
            fill = color if filled else "none"
            parts.append('<rect x="%g" y="%g" width="10" height="10" '
                         'fill="%s" stroke="%s"/>' % (x0, py - 9, fill, color))
            parts.append('<text x="%g" y="%g" font-size="11" '
                         'fill="#111">%s</text>'
                         % (x0 + 15, py, escape(label)))
        return parts


def _prepare(series_list):
    prepared = []
    for k, series in enumerate(series_list):
        x = np.asarray(series.x, dtype=float).ravel()
        y = np.asarray(series.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError("series %d has mismatched x and y lengths" % k)
        if x.size == 0:
            raise ValueError("series %d is empty" % k)
        color = series.color or PALETTE[k % len(PALETTE)]
        prepared.append((x, y, series.label, color, series.filled))
    if not prepared:
        raise ValueError("no series to plot")
    return prepared


def _open_svg(width, height):
    return ('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
            'viewBox="0 0 %d %d">\n'
            '<rect width="%d" height="%d" fill="white"/>'
            % (width, height, width, height, width, height))


def line_chart(series_list, title="", x_label="", y_label="",
               width=WIDTH, height=HEIGHT) -> str:
    prepared = _prepare(series_list)
    xs = np.concatenate([p[0] for p in prepared])
    ys = np.concatenate([p[1] for p in prepared])
    frame = _Frame(_data_range(xs), _data_range(ys), width, height)
    parts = [_open_svg(width, height)]
    parts.extend(frame.chrome(title, x_label, y_label))
    for x, y, _, color, _ in prepared:
        order = np.argsort(x, kind="stable")
        points = " ".join("%g,%g" % (frame.x(px), frame.y(py))
                          for px, py in zip(x[order], y[order]))
        parts.append('<polyline points="%s" fill="none" stroke="%s" '
                     'stroke-width="1.8"/>' % (points, color))
    labeled = [(lab, color, True) for _, _, lab, color, _ in prepared if lab]
    parts.extend(frame.legend(labeled))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_chart(series_list, title="", x_label="", y_label="",
                  width=WIDTH, height=HEIGHT, radius=3.0) -> str:
    prepared = _prepare(series_list)
    xs = np.concatenate([p[0] for p in prepared])
    ys = np.concatenate([p[1] for p in prepared])
    frame = _Frame(_data_range(xs), _data_range(ys), width, height)
    parts = [_open_svg(width, height)]
    parts.extend(frame.chrome(title, x_label, y_label))
    for x, y, _, color, filled in prepared:
        if filled:
            style = 'fill="%s" fill-opacity="0.65" stroke="none"' % color
        else:
            style = 'fill="none" stroke="%s" stroke-width="1.2"' % color
        for px, py in zip(x, y):
            parts.append('<circle cx="%g" cy="%g" r="%g" %s/>'
                         % (frame.x(px), frame.y(py), radius, style))
    labeled = [(lab, color, filled)
               for _, _, lab, color, filled in prepared if lab]
    parts.extend(frame.legend(labeled))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def density_series(values, label="", color=None, grid_points=200) -> Series:
    """Kernel density curve of a 1-d sample, ready for line_chart."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size < 2 or float(np.std(values)) == 0.0:
        raise ValueError("density estimate needs at least two distinct values")
    kde = gaussian_kde(values)
    lo, hi = _data_range(values, pad_frac=0.15)
    grid = np.linspace(lo, hi, grid_points)
    return Series(x=grid, y=kde(grid), label=label, color=color)


def hstack(svg_documents, width=WIDTH, height=HEIGHT) -> str:
    """Place chart documents side by side in one wider SVG."""
    total = width * len(svg_documents)
    parts = [_open_svg(total, height)]
    for k, doc in enumerate(svg_documents):
        inner = doc.replace('<svg xmlns="http://www.w3.org/2000/svg" ',
                            '<svg x="%d" ' % (k * width), 1)
        parts.append(inner)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
