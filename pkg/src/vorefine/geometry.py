"""Exact planar geometry over Q(sqrt(3)): points, convex polygons, clipping.

Predicates are filtered: a float evaluation decides when it is clearly
away from zero, otherwise the exact QuadExt expression is used.  Results
never depend on the float path.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .exactnum import QuadExt, as_quad

Point2 = tuple  # (QuadExt, QuadExt)

_FILTER = 1e-9


def pt(x, y) -> Point2:
    return (as_quad(x), as_quad(y))


def fpt(p: Point2) -> tuple[float, float]:
    return (float(p[0]), float(p[1]))


def sub(p: Point2, q: Point2) -> Point2:
    return (p[0] - q[0], p[1] - q[1])


def add(p: Point2, q: Point2) -> Point2:
    return (p[0] + q[0], p[1] + q[1])


def scale(p: Point2, s) -> Point2:
    return (p[0] * s, p[1] * s)


def midpoint(p: Point2, q: Point2) -> Point2:
    h = Fraction(1, 2)
    return ((p[0] + q[0]) * h, (p[1] + q[1]) * h)


def cross_exact(o: Point2, a: Point2, b: Point2) -> QuadExt:
    """cross(a - o, b - o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def orient(o: Point2, a: Point2, b: Point2) -> int:
    """Sign of cross(a - o, b - o): +1 left turn, -1 right turn, 0 collinear."""
    ox, oy = float(o[0]), float(o[1])
    c = (float(a[0]) - ox) * (float(b[1]) - oy) - (float(a[1]) - oy) * (float(b[0]) - ox)
    if c > _FILTER:
        return 1
    if c < -_FILTER:
        return -1
    return cross_exact(o, a, b).sign()


def dot2(p: Point2, q: Point2) -> QuadExt:
    return p[0] * q[0] + p[1] * q[1]


class ConvexPolygon:
    """Counterclockwise, strictly convex polygon with exact vertices."""

    __slots__ = ("vertices", "_fl", "_bbox")

    def __init__(self, vertices: Iterable[Point2], check: bool = True):
        self.vertices = tuple((as_quad(x), as_quad(y)) for x, y in vertices)
        self._fl = None
        self._bbox = None
        if check:
            self.validate()

    def validate(self) -> None:
        v = self.vertices
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if len(set(v)) != len(v):
            raise ValueError("repeated vertex")
        n = len(v)
        for i in range(n):
            if orient(v[i - 1], v[i], v[(i + 1) % n]) <= 0:
                raise ValueError("polygon is not strictly convex and counterclockwise")

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __eq__(self, other):
        if not isinstance(other, ConvexPolygon) or len(other) != len(self):
            return False
        v, w = self.vertices, other.vertices
        try:
            k = w.index(v[0])
        except ValueError:
            return False
        return all(v[i] == w[(i + k) % len(w)] for i in range(len(v)))

    def __hash__(self):
        return hash(frozenset(self.vertices))

    def __repr__(self):
        return "ConvexPolygon([" + ", ".join(f"({x}, {y})" for x, y in self.vertices) + "])"

    @property
    def float_vertices(self) -> list[tuple[float, float]]:
        if self._fl is None:
            self._fl = [fpt(p) for p in self.vertices]
        return self._fl

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        if self._bbox is None:
            xs = [p[0] for p in self.float_vertices]
            ys = [p[1] for p in self.float_vertices]
            self._bbox = (min(xs), min(ys), max(xs), max(ys))
        return self._bbox

    def edges(self) -> list[tuple[Point2, Point2]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def area(self) -> QuadExt:
        return polygon_area(self.vertices)

    def centroid(self) -> Point2:
        """Vertex average; exact and strictly interior for a convex polygon."""
        n = len(self.vertices)
        sx = sum((p[0] for p in self.vertices), QuadExt(0))
        sy = sum((p[1] for p in self.vertices), QuadExt(0))
        return (sx / n, sy / n)

    def translate(self, t: Point2) -> ConvexPolygon:
        return ConvexPolygon([add(p, t) for p in self.vertices], check=False)

    def scaled(self, s) -> ConvexPolygon:
        return ConvexPolygon([scale(p, s) for p in self.vertices], check=False)

    def diameter_float(self) -> float:
        f = self.float_vertices
        return max(((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) ** 0.5 for a in f for b in f)

    def contains(self, p: Point2, strict: bool = False) -> bool:
        """Point membership (closed by default, open if ``strict``)."""
        x, y = float(p[0]), float(p[1])
        bx0, by0, bx1, by1 = self.bbox
        if x < bx0 - 1e-7 or x > bx1 + 1e-7 or y < by0 - 1e-7 or y > by1 + 1e-7:
            return False
        for a, b in self.edges():
            s = orient(a, b, p)
            if s < 0 or (strict and s == 0):
                return False
        return True

    def location(self, p: Point2) -> int:
        """+1 interior, 0 boundary, -1 exterior."""
        on = False
        for a, b in self.edges():
            s = orient(a, b, p)
            if s < 0:
                return -1
            if s == 0:
                on = True
        return 0 if on else 1


def polygon_area(vertices: Sequence[Point2]) -> QuadExt:
    n = len(vertices)
    acc = QuadExt(0)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        acc = acc + (x0 * y1 - x1 * y0)
    return acc * Fraction(1, 2)


def _clean(vs: list[Point2]) -> list[Point2]:
    out: list[Point2] = []
    for p in vs:
        if not out or out[-1] != p:
            out.append(p)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        for i in range(len(out)):
            if orient(out[i - 1], out[i], out[(i + 1) % len(out)]) == 0:
                del out[i]
                changed = True
                break
    return out


def clip_halfplane(vs: list[Point2], a: Point2, b: Point2) -> list[Point2]:
    """Keep the part of polygon ``vs`` left of (or on) the directed line a->b."""
    if not vs:
        return vs
    sides = [orient(a, b, p) for p in vs]
    if all(s >= 0 for s in sides):
        return vs
    if all(s <= 0 for s in sides):
        return []
    out = []
    n = len(vs)
    for i in range(n):
        p, q = vs[i], vs[(i + 1) % n]
        sp, sq = sides[i], sides[(i + 1) % n]
        if sp >= 0:
            out.append(p)
        if sp * sq < 0:
            cp = cross_exact(a, b, p)
            cq = cross_exact(a, b, q)
            t = cp / (cp - cq)
            out.append((p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t))
    return out


def _bbox_disjoint(b1, b2, pad=1e-7) -> bool:
    return b1[2] < b2[0] - pad or b2[2] < b1[0] - pad or b1[3] < b2[1] - pad or b2[3] < b1[1] - pad


def clip(subject: ConvexPolygon, clipper: ConvexPolygon) -> Optional[ConvexPolygon]:
    """Exact intersection of two convex polygons; None if it has zero area."""
    if _bbox_disjoint(subject.bbox, clipper.bbox):
        return None
    vs = list(subject.vertices)
    for a, b in clipper.edges():
        vs = clip_halfplane(vs, a, b)
        if not vs:
            return None
    vs = _clean(vs)
    if len(vs) < 3:
        return None
    return ConvexPolygon(vs, check=False)


def split_by_polygon(subject: ConvexPolygon, cell: ConvexPolygon):
    """Split ``subject`` into (inside part, list of convex outside parts)."""
    inside = clip(subject, cell)
    if inside is None:
        return None, [subject]
    if inside == subject:
        return inside, []
    outside = []
    rest = list(subject.vertices)
    for a, b in cell.edges():
        out_piece = _clean(clip_halfplane(rest, b, a))
        if len(out_piece) >= 3:
            outside.append(ConvexPolygon(out_piece, check=False))
        rest = clip_halfplane(rest, a, b)
        if not rest:
            break
    return inside, outside


def box_polygon(x0, y0, x1, y1) -> ConvexPolygon:
    return ConvexPolygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], check=False)


def closures_meet(p: ConvexPolygon, q: ConvexPolygon) -> bool:
    """True iff the closed convex polygons intersect (separating-axis test)."""
    if _bbox_disjoint(p.bbox, q.bbox):
        return False
    for poly, other in ((p, q), (q, p)):
        for a, b in poly.edges():
            # other lies strictly right of edge line a->b  => separated
            if all(orient(a, b, v) < 0 for v in other.vertices):
                return False
    return True


def interiors_meet(p: ConvexPolygon, q: ConvexPolygon) -> bool:
    return clip(p, q) is not None


def segment_param(a: Point2, b: Point2, p: Point2) -> QuadExt:
    """Parameter t with p = a + t (b - a) for p on the line through a, b."""
    d = sub(b, a)
    return dot2(sub(p, a), d) / dot2(d, d)


def collinear(a: Point2, b: Point2, p: Point2) -> bool:
    return orient(a, b, p) == 0
