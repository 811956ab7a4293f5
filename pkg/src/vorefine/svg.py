"""Static SVG drawings of windows, arrangements and certificates.

Coordinates are rounded to 9 decimals and y is flipped so the output is
byte-stable and reads with y pointing up.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .geometry import ConvexPolygon, clip
from .tess2d import StraddleReport, Tessellation2D, Window, cells_in_window

_PX = 400.0


def _num(x: float) -> str:
    s = f"{round(float(x), 9):.9f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Canvas:
    def __init__(self, window: Window):
        x0, y0, x1, y1 = (float(c) for c in window.bbox)
        self.x0, self.y1 = x0, y1
        self.k = _PX / max(x1 - x0, y1 - y0)
        self.w, self.h = (x1 - x0) * self.k, (y1 - y0) * self.k
        self.items: list[str] = []

    def xy(self, p) -> str:
        return f"{_num((float(p[0]) - self.x0) * self.k)},{_num((self.y1 - float(p[1])) * self.k)}"

    def polygon(self, poly: ConvexPolygon, fill="none", stroke="#000", width=1.0, opacity=1.0):
        pts = " ".join(self.xy(p) for p in poly.vertices)
        self.items.append(f'<polygon points="{pts}" fill="{fill}" fill-opacity="{_num(opacity)}" '
                          f'stroke="{stroke}" stroke-width="{_num(width)}"/>')

    def segment(self, a, b, stroke="#000", width=1.0):
        (ax, ay), (bx, by) = self.xy(a).split(","), self.xy(b).split(",")
        self.items.append(f'<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" '
                          f'stroke="{stroke}" stroke-width="{_num(width)}"/>')

    def dot(self, p, r=4.0, fill="#d62728"):
        x, y = self.xy(p).split(",")
        self.items.append(f'<circle cx="{x}" cy="{y}" r="{_num(r)}" fill="{fill}"/>')

    def text(self, s: str):
        self.items.append(f'<title>{s}</title>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(self.w)}" '
                f'height="{_num(self.h)}" viewBox="0 0 {_num(self.w)} {_num(self.h)}">')
        return "\n".join([head, *self.items, "</svg>"]) + "\n"


def _clip_to_window(poly: ConvexPolygon, window: Window) -> Optional[ConvexPolygon]:
    return clip(poly, window.polygon())


def draw_tessellations(window: Window, coarse: Tessellation2D, fine: Iterable[Tessellation2D] = (),
                       straddle: Optional[StraddleReport] = None, title: str = "") -> str:
    cv = _Canvas(window)
    if title:
        cv.text(title)
    for t in fine:
        for _, c in cells_in_window(t, window):
            piece = _clip_to_window(c, window)
            if piece is not None:
                cv.polygon(piece, stroke="#1f77b4", width=0.6)
    for _, c in cells_in_window(coarse, window):
        piece = _clip_to_window(c, window)
        if piece is not None:
            cv.polygon(piece, stroke="#000", width=1.8)
    if straddle is not None and straddle.witness is not None:
        w = straddle.witness
        cv.segment(*w["coarse_edge"], stroke="#d62728", width=3.0)
        cv.dot(w["crossing_point"])
    return cv.render()


def draw_arrangement(arrangement, highlight: Sequence[int] = (), title: str = "") -> str:
    """Regions of an arrangement; ``highlight`` lists region indices to fill."""
    cv = _Canvas(arrangement.window)
    if title:
        cv.text(title)
    marked = set(highlight)
    for i, r in enumerate(arrangement.regions):
        if i in marked:
            cv.polygon(r.polygon, fill="#ff7f0e", stroke="#7f7f7f", width=0.4, opacity=0.6)
        elif r.target:
            cv.polygon(r.polygon, fill="#2ca02c", stroke="#7f7f7f", width=0.4, opacity=0.15)
        else:
            cv.polygon(r.polygon, stroke="#7f7f7f", width=0.4)
    cv.polygon(arrangement.coarse_cell, stroke="#000", width=2.0)
    return cv.render()


def draw_report(report) -> str:
    """First coarse prototype's arrangement with certificate regions highlighted."""
    c = report.cells[0]
    cert = [e for e, _ in c.result.certificate] if not c.result.feasible else []
    svg = draw_arrangement(c.arrangement, cert, title=f"verdict: {report.verdict}")
    if report.straddle is not None and report.straddle.witness is not None:
        w = report.straddle.witness
        cv = _Canvas(c.arrangement.window)
        cv.segment(*w["coarse_edge"], stroke="#d62728", width=3.0)
        cv.dot(w["crossing_point"])
        svg = svg.replace("</svg>\n", "\n".join(cv.items) + "\n</svg>\n")
    return svg

