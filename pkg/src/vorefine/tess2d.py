"""Periodic plane tessellations with exact vertices, and the facet tests.

A tessellation is a finite list of prototype polygons translated by an
integer lattice ``i*b1 + j*b2``, then scaled and shifted.  Cells are
identified by ``((i, j), k)`` with ``k`` the prototype index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .exactnum import QuadExt, as_quad, format_exact
from .geometry import (
    ConvexPolygon,
    Point2,
    add,
    box_polygon,
    closures_meet,
    collinear,
    cross_exact,
    midpoint,
    orient,
    pt,
    scale,
    segment_param,
    sub,
)

KINDS = ("square", "triangular", "hexagonal", "trihexagonal")

S3 = QuadExt.sqrt(3)
H = Fraction(1, 2)

CellId = tuple  # ((i, j), k)


def _prototypes(kind: str):
    if kind == "square":
        protos = [[(0, 0), (1, 0), (1, 1), (0, 1)]]
        basis = (pt(1, 0), pt(0, 1))
    elif kind == "triangular":
        protos = [[(0, 0), (1, 0), (H, S3 * H)],
                  [(1, 0), (Fraction(3, 2), S3 * H), (H, S3 * H)]]
        basis = (pt(1, 0), pt(H, S3 * H))
    elif kind == "hexagonal":
        protos = [[(2, 0), (1, S3), (-1, S3), (-2, 0), (-1, -S3), (1, -S3)]]
        basis = (pt(3, S3), pt(0, 2 * S3))
    elif kind == "trihexagonal":
        h3 = S3 * H
        protos = [[(1, 0), (H, h3), (-H, h3), (-1, 0), (-H, -h3), (H, -h3)],
                  [(1, 0), (Fraction(3, 2), h3), (H, h3)],
                  [(-H, h3), (H, h3), (0, S3)]]
        basis = (pt(2, 0), pt(1, S3))
    else:
        raise ValueError(f"unknown tessellation kind {kind!r}; expected one of {KINDS}")
    return [ConvexPolygon(p) for p in protos], basis


@dataclass(frozen=True)
class Tessellation2D:
    kind: str
    prototypes: tuple
    basis: tuple
    scale: Fraction
    shift: Point2

    def __post_init__(self):
        object.__setattr__(self, "_cells", {})

    @property
    def cell_basis(self) -> tuple[Point2, Point2]:
        return scale(self.basis[0], self.scale), scale(self.basis[1], self.scale)

    def cell(self, cid: CellId) -> ConvexPolygon:
        hit = self._cells.get(cid)
        if hit is not None:
            return hit
        (i, j), k = cid
        b1, b2 = self.basis
        t = (b1[0] * i + b2[0] * j, b1[1] * i + b2[1] * j)
        s = self.scale
        c = ConvexPolygon(
            [((x + t[0]) * s + self.shift[0], (y + t[1]) * s + self.shift[1])
             for x, y in self.prototypes[k].vertices],
            check=False,
        )
        self._cells[cid] = c
        return c

    def fundamental_area(self) -> QuadExt:
        b1, b2 = self.cell_basis
        return abs(b1[0] * b2[1] - b1[1] * b2[0])

    def _float_frame(self):
        b1, b2 = self.cell_basis
        a, c = float(b1[0]), float(b2[0])
        b, d = float(b1[1]), float(b2[1])
        det = a * d - b * c
        inv = ((d / det, -c / det), (-b / det, a / det))
        sx, sy = float(self.shift[0]), float(self.shift[1])
        reach = max(math.hypot(*p) for proto in self.prototypes for p in proto.float_vertices)
        reach *= float(self.scale)
        return inv, (sx, sy), reach

    def lattice_coords(self, x: float, y: float) -> tuple[float, float]:
        inv, (sx, sy), _ = self._float_frame()
        x, y = x - sx, y - sy
        return inv[0][0] * x + inv[0][1] * y, inv[1][0] * x + inv[1][1] * y

    def candidate_translates(self, bbox) -> Iterator[tuple[int, int]]:
        """Integer translates whose cells may meet the float box (superset)."""
        inv, (sx, sy), reach = self._float_frame()
        x0, y0, x1, y1 = bbox
        x0, y0, x1, y1 = x0 - reach - 1e-6, y0 - reach - 1e-6, x1 + reach + 1e-6, y1 + reach + 1e-6
        us, vs = [], []
        for x, y in ((x0, y0), (x1, y0), (x0, y1), (x1, y1)):
            x, y = x - sx, y - sy
            us.append(inv[0][0] * x + inv[0][1] * y)
            vs.append(inv[1][0] * x + inv[1][1] * y)
        for i in range(math.floor(min(us)) - 1, math.ceil(max(us)) + 2):
            for j in range(math.floor(min(vs)) - 1, math.ceil(max(vs)) + 2):
                yield i, j

    def cells_meeting(self, region: ConvexPolygon) -> list[tuple[CellId, ConvexPolygon]]:
        out = []
        for i, j in self.candidate_translates(region.bbox):
            for k in range(len(self.prototypes)):
                c = self.cell(((i, j), k))
                if closures_meet(c, region):
                    out.append((((i, j), k), c))
        out.sort(key=lambda t: t[0])
        return out

    def locate(self, p: Point2) -> Optional[tuple[CellId, ConvexPolygon]]:
        """The cell whose interior contains ``p``; None if ``p`` is on an edge."""
        x, y = float(p[0]), float(p[1])
        for i, j in self.candidate_translates((x, y, x, y)):
            for k in range(len(self.prototypes)):
                c = self.cell(((i, j), k))
                loc = c.location(p) if c.contains(p) else -1
                if loc == 1:
                    return ((i, j), k), c
                if loc == 0:
                    return None
        raise AssertionError("point not covered by tessellation")


def make_tessellation(kind: str, scale=1, shift=(0, 0)) -> Tessellation2D:
    s = Fraction(scale)
    if s <= 0:
        raise ValueError("scale must be positive")
    protos, basis = _prototypes(kind)
    return Tessellation2D(kind, tuple(protos), basis, s, pt(*shift))


@dataclass(frozen=True)
class Window:
    """Closed axis-aligned box with exact corners."""
    x0: QuadExt
    y0: QuadExt
    x1: QuadExt
    y1: QuadExt

    @classmethod
    def make(cls, x0, y0, x1, y1) -> Window:
        w = cls(as_quad(x0), as_quad(y0), as_quad(x1), as_quad(y1))
        if w.x1 < w.x0 or w.y1 < w.y0:
            raise ValueError("empty window")
        return w

    @classmethod
    def around(cls, center: Point2, half_width) -> Window:
        h = as_quad(half_width)
        return cls.make(center[0] - h, center[1] - h, center[0] + h, center[1] + h)

    @property
    def bbox(self):
        return (float(self.x0), float(self.y0), float(self.x1), float(self.y1))

    def polygon(self) -> ConvexPolygon:
        return box_polygon(self.x0, self.y0, self.x1, self.y1)

    def area(self) -> QuadExt:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def has_interior(self) -> bool:
        return self.x1 > self.x0 and self.y1 > self.y0

    def contains(self, p: Point2) -> bool:
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1

    def contains_polygon(self, poly: ConvexPolygon) -> bool:
        return all(self.contains(v) for v in poly.vertices)


def cells_in_window(tess: Tessellation2D, window: Window) -> list[tuple[CellId, ConvexPolygon]]:
    """Cells whose closure meets the closed window, sorted by cell id."""
    out = []
    for i, j in tess.candidate_translates(window.bbox):
        for k in range(len(tess.prototypes)):
            c = tess.cell(((i, j), k))
            if _closure_meets_window(c, window):
                out.append((((i, j), k), c))
    out.sort(key=lambda t: t[0])
    return out


def _closure_meets_window(c: ConvexPolygon, w: Window) -> bool:
    if w.has_interior():
        return closures_meet(c, w.polygon())
    if w.x0 == w.x1 and w.y0 == w.y1:
        return c.contains((w.x0, w.y0))
    # degenerate segment window
    a, b = (w.x0, w.y0), (w.x1, w.y1)
    if c.contains(a) or c.contains(b):
        return True
    return any(_segments_cross(a, b, p, q) for p, q in c.edges())


def _segments_cross(a, b, c, d) -> bool:
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return False


# ---------------------------------------------------------------------------
# Facet tests

Edge = tuple  # (Point2, Point2)


def _edge_key(e: Edge):
    a, b = e
    return frozenset((a, b))


def edges_in_window(tess: Tessellation2D, window: Window) -> list[tuple[Edge, CellId]]:
    """Distinct cell edges whose midpoint lies in the closed window."""
    seen = {}
    for cid, c in cells_in_window(tess, window):
        for e in c.edges():
            key = _edge_key(e)
            if key in seen:
                continue
            if window.contains(midpoint(*e)):
                seen[key] = (e, cid)
    return list(seen.values())


def uncovered_parts(seg: Edge, pieces: list[Edge]) -> list[tuple[QuadExt, QuadExt]]:
    """Sub-intervals of [0, 1] along ``seg`` not covered by collinear ``pieces``."""
    a, b = seg
    ivs = []
    for p, q in pieces:
        if not (collinear(a, b, p) and collinear(a, b, q)):
            continue
        t0, t1 = segment_param(a, b, p), segment_param(a, b, q)
        if t1 < t0:
            t0, t1 = t1, t0
        if t1 > 0 and t0 < 1:
            ivs.append((t0, t1))
    ivs.sort(key=_ExactKey)
    gaps = []
    reach = QuadExt(0)
    for t0, t1 in ivs:
        if t0 > reach:
            gaps.append((reach, min(t0, QuadExt(1))))
        if t1 > reach:
            reach = t1
        if reach >= 1:
            break
    if reach < 1:
        gaps.append((reach, QuadExt(1)))
    return [g for g in gaps if g[1] > g[0]]


class _ExactKey:
    __slots__ = ("iv",)

    def __init__(self, iv):
        self.iv = iv

    def __lt__(self, other):
        return self.iv[0] < other.iv[0] or (self.iv[0] == other.iv[0] and self.iv[1] < other.iv[1])


@dataclass(frozen=True)
class StraddleReport:
    verdict: str  # "covered" | "straddled"
    witness: Optional[dict] = None
    edges_checked: int = 0

    def __post_init__(self):
        if (self.verdict == "straddled") != (self.witness is not None):
            raise ValueError("witness present iff straddled")

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "edges_checked": self.edges_checked}
        if self.witness is not None:
            w = self.witness
            out["witness"] = {
                "coarse_edge": [[format_exact(c) for c in p] for p in w["coarse_edge"]],
                "fine_cell": _cid_json(w["fine_cell"]),
                "crossing_point": [format_exact(c) for c in w["crossing_point"]],
            }
        return out


def _cid_json(cid: CellId):
    (i, j), k = cid
    return [i, j, k]


def _crossing_witness(edge: Edge, gap, fine: Tessellation2D):
    """A point in the open gap of ``edge`` off every fine edge, and its fine cell."""
    a, b = edge
    t0, t1 = gap
    d = sub(b, a)
    lo = add(a, scale(d, t0))
    hi = add(a, scale(d, t1))
    ex = box_polygon(min(lo[0], hi[0]), min(lo[1], hi[1]), max(lo[0], hi[0]), max(lo[1], hi[1]))
    # crossing parameters of fine edges along the gap
    cuts = []
    for _, c in fine.cells_meeting(ex):
        for p, q in c.edges():
            sp, sq = orient(a, b, p), orient(a, b, q)
            if sp == 0 and sq == 0:
                continue
            if sp == 0:
                cuts.append(segment_param(a, b, p))
            elif sq == 0:
                cuts.append(segment_param(a, b, q))
            elif sp * sq < 0:
                cp, cq = cross_exact(a, b, p), cross_exact(a, b, q)
                s = cp / (cp - cq)
                x = add(p, scale(sub(q, p), s))
                cuts.append(segment_param(a, b, x))
    inner = [t for t in cuts if t0 < t < t1]
    stop = min(inner, default=t1)
    t = (t0 + stop) * H
    x = add(a, scale(d, t))
    hit = fine.locate(x)
    if hit is None:
        raise AssertionError("witness point landed on a fine edge")
    return x, hit[0]


def straddle_test(coarse: Tessellation2D, fine: Tessellation2D, window: Window) -> StraddleReport:
    """Check every coarse edge in the window is a union of fine edges."""
    full = [cid for cid, c in cells_in_window(coarse, window) if window.contains_polygon(c)]
    if not full:
        raise ValueError("window too small to contain a full coarse cell")
    edges = edges_in_window(coarse, window)
    for e, _ in edges:
        a, b = e
        box = box_polygon(min(a[0], b[0]), min(a[1], b[1]), max(a[0], b[0]), max(a[1], b[1]))
        pieces = [fe for _, c in fine.cells_meeting(box) for fe in c.edges()]
        gaps = uncovered_parts(e, pieces)
        if gaps:
            x, cid = _crossing_witness(e, gaps[0], fine)
            return StraddleReport("straddled", {"coarse_edge": e, "fine_cell": cid,
                                                "crossing_point": x}, len(edges))
    return StraddleReport("covered", None, len(edges))


def _lattice_period(tess: Tessellation2D, direction: Point2) -> Optional[Point2]:
    """Shortest lattice translation parallel to ``direction``, if any."""
    b1, b2 = tess.cell_basis
    det = b1[0] * b2[1] - b1[1] * b2[0]
    # direction = alpha*b1 + beta*b2
    alpha = (direction[0] * b2[1] - direction[1] * b2[0]) / det
    beta = (b1[0] * direction[1] - b1[1] * direction[0]) / det
    if not alpha:
        p, q = 0, 1
    elif not beta:
        p, q = 1, 0
    else:
        ratio = alpha / beta
        if not ratio.is_rational():
            return None
        r = ratio.a
        p, q = r.numerator, r.denominator
    return add(scale(b1, p), scale(b2, q))


def is_tess_edge(tess: Tessellation2D, edge: Edge) -> bool:
    a, b = edge
    key = _edge_key(edge)
    box = box_polygon(min(a[0], b[0]), min(a[1], b[1]), max(a[0], b[0]), max(a[1], b[1]))
    return any(_edge_key(e) == key for _, c in tess.cells_meeting(box) for e in c.edges())


def line_containment_test(tess: Tessellation2D, edge: Edge) -> bool:
    """Is the whole line through ``edge`` a union of tessellation edges?"""
    if not is_tess_edge(tess, edge):
        raise ValueError("edge is not a tessellation facet")
    a, b = edge
    period = _lattice_period(tess, sub(b, a))
    if period is None:
        return False
    seg = (a, add(a, period))
    x0, x1 = sorted([seg[0][0], seg[1][0]])
    y0, y1 = sorted([seg[0][1], seg[1][1]])
    box = box_polygon(x0, y0, x1, y1) if x0 != x1 and y0 != y1 else _thin_box(x0, y0, x1, y1)
    pieces = [e for _, c in tess.cells_meeting(box) for e in c.edges()]
    return not uncovered_parts(seg, pieces)


def _thin_box(x0, y0, x1, y1) -> ConvexPolygon:
    eps = Fraction(1, 10**6)
    return box_polygon(x0 - eps, y0 - eps, x1 + eps, y1 + eps)


def edge_orbits(tess: Tessellation2D) -> list[Edge]:
    """One representative edge per prototype edge (translate (0, 0))."""
    seen = set()
    reps = []
    for k in range(len(tess.prototypes)):
        for e in tess.cell(((0, 0), k)).edges():
            key = _edge_key(e)
            if key not in seen:
                seen.add(key)
                reps.append(e)
    return reps


def tessellation_report(kind: str, fine_scale, window_radius=2) -> dict:
    coarse = make_tessellation(kind)
    fine = make_tessellation(kind, fine_scale)
    c0 = coarse.cell(((0, 0), 0))
    diam = Fraction(math.ceil(c0.diameter_float()))
    window = Window.around(c0.centroid(), Fraction(window_radius) * diam)
    st = straddle_test(coarse, fine, window)
    lines = [{"edge": [[format_exact(c) for c in p] for p in e],
              "line_contained": line_containment_test(coarse, e)} for e in edge_orbits(coarse)]
    return {
        "kind": kind,
        "fine_scale": format_exact(Fraction(fine_scale)),
        "straddle": st.to_json(),
        "line_containment": lines,
        "all_lines_contained": all(x["line_contained"] for x in lines),
    }
