"""
SVG plots of curves.

Each curve becomes one <polyline> through its exact breakpoints; an
optional histogram is drawn as <rect> bars behind the curves. The
output carries a version comment and is otherwise a pure function of
its inputs.
"""

import xml.etree.ElementTree as ET
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import TOOL_NAME, __version__
from .models import Interval

SVG_NS = "http://www.w3.org/2000/svg"
MARGIN = 50
TICKS = 6
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

Series = Tuple[str, Sequence[float], Sequence[float]]


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


class _Frame:
    """Maps data coordinates to pixel coordinates."""

    def __init__(self, width: int, height: int, x_range: Tuple[float, float], y_range: Tuple[float, float]):
        self.width, self.height = width, height
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 == self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x1 + 0.5
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x: float) -> float:
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * (self.width - 2 * MARGIN)

    def py(self, y: float) -> float:
        return self.height - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (self.height - 2 * MARGIN)


def _axes(root: ET.Element, frame: _Frame) -> None:
    group = ET.SubElement(root, "g", {"stroke": "black", "stroke-width": "1", "font-size": "11", "font-family": "sans-serif"})
    left, bottom = MARGIN, frame.height - MARGIN
    ET.SubElement(group, "line", {"x1": _fmt(left), "y1": _fmt(bottom), "x2": _fmt(frame.width - MARGIN), "y2": _fmt(bottom)})
    ET.SubElement(group, "line", {"x1": _fmt(left), "y1": _fmt(bottom), "x2": _fmt(left), "y2": _fmt(MARGIN)})

    for x in np.linspace(frame.x0, frame.x1, TICKS):
        px = frame.px(float(x))
        ET.SubElement(group, "line", {"x1": _fmt(px), "y1": _fmt(bottom), "x2": _fmt(px), "y2": _fmt(bottom + 5)})
        label = ET.SubElement(group, "text", {"x": _fmt(px), "y": _fmt(bottom + 18), "text-anchor": "middle", "stroke": "none"})
        label.text = _tick_label(float(x))
    for y in np.linspace(frame.y0, frame.y1, TICKS):
        py = frame.py(float(y))
        ET.SubElement(group, "line", {"x1": _fmt(left - 5), "y1": _fmt(py), "x2": _fmt(left), "y2": _fmt(py)})
        label = ET.SubElement(group, "text", {"x": _fmt(left - 8), "y": _fmt(py + 4), "text-anchor": "end", "stroke": "none"})
        label.text = _tick_label(float(y))


def render_svg(
    series: Sequence[Series],
    width: int = 800,
    height: int = 500,
    bars: Optional[List[Tuple[Interval, float]]] = None,
    title: Optional[str] = None,
) -> str:
    """
    Render curves (label, xs, ys) and optional histogram bars (bin, height).

    Args:
        series: Curves drawn in order, one polyline each
        width: Image width in pixels
        height: Image height in pixels
        bars: Histogram bins with their bar heights, drawn first
        title: Optional title text

    Returns:
        SVG document text
    """
    xs_all = [float(x) for _, xs, _ in series for x in xs]
    ys_all = [float(y) for _, _, ys in series for y in ys]
    for iv, h in bars or []:
        xs_all += [iv.lo, iv.hi]
        ys_all.append(float(h))
    x_range = (min(xs_all), max(xs_all)) if xs_all else (0.0, 1.0)
    y_range = (0.0, max(ys_all + [0.0]))
    frame = _Frame(width, height, x_range, y_range)

    root = ET.Element("svg", {
        "xmlns": SVG_NS,
        "width": str(width),
        "height": str(height),
        "viewBox": f"0 0 {width} {height}",
    })
    root.append(ET.Comment(f" {TOOL_NAME} {__version__} "))
    ET.SubElement(root, "rect", {"width": str(width), "height": str(height), "fill": "white"})
    if title:
        heading = ET.SubElement(root, "text", {
            "x": _fmt(width / 2), "y": _fmt(MARGIN / 2), "text-anchor": "middle",
            "font-size": "14", "font-family": "sans-serif",
        })
        heading.text = title

    if bars:
        group = ET.SubElement(root, "g", {"class": "histogram", "fill": "#cccccc", "stroke": "#888888"})
        for iv, h in bars:
            top = frame.py(float(h))
            ET.SubElement(group, "rect", {
                "x": _fmt(frame.px(iv.lo)),
                "y": _fmt(top),
                "width": _fmt(frame.px(iv.hi) - frame.px(iv.lo)),
                "height": _fmt(frame.py(0.0) - top),
            })

    _axes(root, frame)

    for i, (label, xs, ys) in enumerate(series):
        points = " ".join(f"{_fmt(frame.px(float(x)))},{_fmt(frame.py(float(y)))}" for x, y in zip(xs, ys))
        line = ET.SubElement(root, "polyline", {
            "points": points,
            "fill": "none",
            "stroke": PALETTE[i % len(PALETTE)],
            "stroke-width": "1.5",
        })
        ET.SubElement(line, "title").text = label

    return ET.tostring(root, encoding="unicode") + "\n"
