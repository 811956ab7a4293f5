from fractions import Fraction

import pytest

from vorefine.exactnum import QuadExt
from vorefine.geometry import ConvexPolygon, clip, orient, pt
from vorefine.tess2d import (
    KINDS,
    Window,
    cells_in_window,
    edge_orbits,
    edges_in_window,
    line_containment_test,
    make_tessellation,
    straddle_test,
    tessellation_report,
    uncovered_parts,
)

S3 = QuadExt.sqrt(3)


def test_hexagon_prototype():
    hexa = make_tessellation("hexagonal").cell(((0, 0), 0))
    assert hexa == ConvexPolygon([(2, 0), (1, S3), (-1, S3), (-2, 0), (-1, -S3), (1, -S3)])


@pytest.mark.parametrize("kind", KINDS)
def test_prototype_areas_fill_fundamental_domain(kind):
    t = make_tessellation(kind)
    total = sum((t.cell(((0, 0), k)).area() for k in range(len(t.prototypes))), QuadExt(0))
    assert total == t.fundamental_area()


def test_trihexagonal_prototypes():
    t = make_tessellation("trihexagonal")
    assert sorted(len(p) for p in t.prototypes) == [3, 3, 6]


@pytest.mark.parametrize("kind", KINDS)
def test_window_is_tiled_exactly(kind):
    t = make_tessellation(kind, Fraction(1, 2), (Fraction(1, 3), 0))
    w = Window.make(-1, -1, 2, Fraction(3, 2))
    area = QuadExt(0)
    for _, c in cells_in_window(t, w):
        piece = clip(c, w.polygon())
        if piece is not None:
            area = area + piece.area()
    assert area == w.area()


def test_square_window_count():
    assert len(cells_in_window(make_tessellation("square"), Window.make(0, 0, 2, 2))) == 16


def test_hex_bbox_window():
    t = make_tessellation("hexagonal")
    w = Window.make(-2, -S3, 2, S3)
    cells = cells_in_window(t, w)
    full = [c for c in cells if w.contains_polygon(c[1])]
    assert len(full) == 1
    partial = [c for _, c in cells if clip(c, w.polygon()) is not None and not w.contains_polygon(c)]
    assert len(partial) <= 6


def test_point_windows():
    hexa = make_tessellation("hexagonal")
    v = pt(2, 0)
    assert len(cells_in_window(hexa, Window.make(v[0], v[1], v[0], v[1]))) == 3
    sq = make_tessellation("square")
    assert len(cells_in_window(sq, Window.make(1, 1, 1, 1))) == 4
    assert len(cells_in_window(sq, Window.make(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2),
                                               Fraction(1, 2)))) == 1


def test_clip_examples():
    hexa = make_tessellation("hexagonal").cell(((0, 0), 0))
    assert clip(hexa, hexa) == hexa
    a = ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    b = ConvexPolygon([(5, 0), (6, 0), (6, 1), (5, 1)])
    assert clip(a, b) is None


def test_edges_in_window_counts_each_edge_once():
    edges = edges_in_window(make_tessellation("square"), Window.make(0, 0, 1, 1))
    assert len(edges) == 4


def test_uncovered_parts():
    seg = (pt(0, 0), pt(4, 0))
    pieces = [(pt(0, 0), pt(1, 0)), (pt(3, 0), pt(2, 0)), (pt(2, 0), pt(4, 0))]
    assert uncovered_parts(seg, pieces) == [(Fraction(1, 4), Fraction(1, 2))]
    assert uncovered_parts(seg, pieces + [(pt(1, 0), pt(2, 0))]) == []


@pytest.mark.parametrize("kind,scale,verdict", [
    ("square", Fraction(1, 2), "covered"),
    ("triangular", Fraction(1, 2), "covered"),
    ("hexagonal", Fraction(1, 2), "straddled"),
    ("hexagonal", Fraction(1, 3), "straddled"),
    ("trihexagonal", Fraction(1, 2), "straddled"),
    ("trihexagonal", Fraction(1, 3), "covered"),
    ("square", Fraction(1, 3), "covered"),
])
def test_straddle(kind, scale, verdict):
    rep = tessellation_report(kind, scale)
    assert rep["straddle"]["verdict"] == verdict


def test_straddle_witness_is_genuine():
    coarse, fine = make_tessellation("hexagonal"), make_tessellation("hexagonal", Fraction(1, 2))
    c0 = coarse.cell(((0, 0), 0))
    rep = straddle_test(coarse, fine, Window.around(c0.centroid(), 4))
    w = rep.witness
    a, b = w["coarse_edge"]
    x = w["crossing_point"]
    cell = fine.cell(w["fine_cell"])
    assert cell.location(x) == 1  # strictly inside the fine cell
    assert orient(a, b, x) == 0
    sides = {orient(a, b, v) for v in cell.vertices}
    assert {1, -1} <= sides


def test_straddle_needs_full_cell():
    coarse = make_tessellation("hexagonal")
    with pytest.raises(ValueError):
        straddle_test(coarse, make_tessellation("hexagonal", Fraction(1, 2)), Window.make(0, 0, 1, 1))


@pytest.mark.parametrize("kind,expected", [
    ("square", True), ("triangular", True), ("hexagonal", False), ("trihexagonal", True),
])
def test_line_containment(kind, expected):
    t = make_tessellation(kind)
    assert all(line_containment_test(t, e) == expected for e in edge_orbits(t))


def test_line_containment_rejects_non_edges():
    with pytest.raises(ValueError):
        line_containment_test(make_tessellation("square"), (pt(0, 0), pt(1, 1)))


def test_bad_inputs():
    with pytest.raises(ValueError):
        make_tessellation("pentagonal")
    with pytest.raises(ValueError):
        make_tessellation("square", 0)
    with pytest.raises(ValueError):
        Window.make(1, 0, 0, 1)
