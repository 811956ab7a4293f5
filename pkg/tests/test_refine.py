from collections import defaultdict
from fractions import Fraction

import pytest

from vorefine.exactnum import QuadExt, parse_exact
from vorefine.geometry import pt
from vorefine.refine import (
    FineFamilySpec,
    RefinementSystem,
    Window,
    assemble_system,
    build_arrangement,
    check_refinability,
    default_window,
    lozenge_families,
    parse_shift,
    propagation_families,
    propagation_trace,
    region_at,
    solve_exact,
    spot_check,
    unknown_name,
    verify_certificate,
    verify_solution,
)
from vorefine.tess2d import make_tessellation

from oracles import raster_disagreement, weighted_cells

H = Fraction(1, 2)
S3 = QuadExt.sqrt(3)


def coarse_cell(kind, k=0):
    return make_tessellation(kind).cell(((0, 0), k))


@pytest.fixture(scope="module")
def propagation():
    fam = propagation_families()
    rep = check_refinability(make_tessellation("hexagonal"), fam)
    return fam, rep


def test_square_arrangement():
    c = coarse_cell("square")
    fam = FineFamilySpec.single("square", H)
    arr = build_arrangement(c, fam, default_window(c, 1))
    inside = [r for r in arr.regions if r.target == 1]
    assert len(inside) == 4
    assert arr.area() == arr.window.area()
    sys = assemble_system(arr)
    res = solve_exact(sys)
    assert res.feasible
    ones = {sys.unknowns[u] for u, v in res.weights.items() if v}
    assert all(res.weights[u] in (0, 1) for u in res.weights)
    assert ones == {(0, ((i, j), 0)) for i in (0, 1) for j in (0, 1)}


@pytest.mark.parametrize("kind,scale", [("hexagonal", H), ("triangular", H),
                                        ("trihexagonal", Fraction(1, 3))])
def test_arrangement_partitions_window(kind, scale):
    c = coarse_cell(kind)
    arr = build_arrangement(c, FineFamilySpec.single(kind, scale), default_window(c, 2))
    assert arr.area() == arr.window.area()
    inside = sum((r.polygon.area() for r in arr.regions if r.target), QuadExt(0))
    assert inside == c.area()


def test_lozenge_pair():
    c = coarse_cell("hexagonal")
    arr = build_arrangement(c, lozenge_families(), default_window(c, 1))
    assert arr.area() == arr.window.area()
    groups = defaultdict(list)
    for r in arr.regions:
        groups[r.membership].append(r)
    pairs = [g for g in groups.values()
             if len(g) == 2 and {r.target for r in g} == {0, 1} and all(len(r.polygon) == 3 for r in g)]
    assert pairs
    a, b = pairs[0]
    assert a.polygon.area() == b.polygon.area()
    sys = assemble_system(arr)
    res = solve_exact(sys)
    assert not res.feasible and len(res.certificate) == 2
    (e1, _), (e2, _) = res.certificate
    assert sys.equations[e1][0] == sys.equations[e2][0]
    assert {sys.equations[e1][1], sys.equations[e2][1]} == {0, 1}


def test_single_region_equation():
    c = coarse_cell("hexagonal")
    arr = build_arrangement(c, propagation_families(), default_window(c, 1))
    i = region_at(arr, (QuadExt(H), QuadExt(Fraction(1, 4))))
    sys = assemble_system(arr)
    idx, t = sys.equations[i]
    assert len(idx) == 3 and t == 1
    assert len({sys.unknowns[u][0] for u in idx}) == 3


def test_window_too_small():
    c = coarse_cell("hexagonal")
    with pytest.raises(ValueError):
        build_arrangement(c, FineFamilySpec.single("hexagonal", H), Window.make(-2, -2, 2, 2))


def test_solver_small_systems():
    sys = RefinementSystem([(0, ((0, 0), 0)), (0, ((1, 0), 0))], [((0, 1), 1), ((0,), 1)])
    res = solve_exact(sys)
    assert res.feasible and verify_solution(sys, res.weights)
    assert res.weights == {0: 1, 1: 0}
    bad = RefinementSystem(sys.unknowns, [((0, 1), 1), ((0,), 1), ((1,), 1)])
    res = solve_exact(bad)
    assert not res.feasible and verify_certificate(bad, res.certificate)
    free = RefinementSystem(sys.unknowns, [((0, 1), 1)])
    assert solve_exact(free).free_variables == 1


@pytest.mark.parametrize("kind,scale,refinable,per_cell", [
    ("square", H, True, 4),
    ("triangular", H, True, 4),
    ("hexagonal", H, False, None),
    ("hexagonal", Fraction(1, 3), False, None),
    ("trihexagonal", H, False, None),
    ("trihexagonal", Fraction(1, 3), True, None),
])
def test_check_refinability(kind, scale, refinable, per_cell):
    rep = check_refinability(make_tessellation(kind), FineFamilySpec.single(kind, scale))
    assert rep.refinable == refinable
    for c in rep.cells:
        if refinable:
            nz = [v for v in c.result.weights.values() if v]
            assert c.reproduction_verified
            if per_cell:
                assert nz == [1] * per_cell
        else:
            assert verify_certificate(c.system, c.result.certificate)
    js = rep.to_json()
    assert js["verdict"] == ("refinable" if refinable else "not_refinable")
    for w in js.get("weights", []):
        parse_exact(w["value"])


def test_hex_single_family_certificate_is_two_regions():
    rep = check_refinability(make_tessellation("hexagonal"), FineFamilySpec.single("hexagonal", H))
    assert rep.straddle.verdict == "straddled"
    assert len(rep.cells[0].result.certificate) == 2


def test_trihexagonal_third_raster_oracle():
    fam = FineFamilySpec.single("trihexagonal", Fraction(1, 3))
    coarse = make_tessellation("trihexagonal")
    rep = check_refinability(coarse, fam)
    assert rep.refinable
    for k in range(3):
        bad, interior_bad = raster_disagreement(coarse.cell(((0, 0), k)), weighted_cells(rep, fam, k))
        assert interior_bad == 0


def test_spot_check_triangular():
    fam = FineFamilySpec.single("triangular", H)
    coarse = make_tessellation("triangular")
    rep = check_refinability(coarse, fam)
    res = spot_check(coarse, fam, rep, 400, seed=3)
    assert res["points"] == 400 and res["mismatches"] == 0


def test_propagation_infeasible(propagation):
    fam, rep = propagation
    assert not rep.refinable
    c = rep.cells[0]
    assert verify_certificate(c.system, c.result.certificate)


def test_propagation_trace_example(propagation):
    _, rep = propagation
    sys = rep.cells[0].system
    seed = region_at(rep.cells[0].arrangement, (QuadExt(H), QuadExt(Fraction(1, 4))))
    tr = propagation_trace(sys, seed)
    assert tr.found
    assert all(s.certified(sys) for s in tr.steps)
    assert verify_certificate(sys, tr.certificate)
    r1, r0 = tr.contradiction
    assert sys.equations[r1][1] == 1 and sys.equations[r0][1] == 0
    names = [unknown_name(sys.unknowns[u]) for u in sys.equations[r1][0]]
    assert names == ["w0[0,0]", "w1[0,0]", "w2[1,-1]"]
    assert len(tr.steps) == 4


def test_propagation_trace_square_exhausts():
    c = coarse_cell("square")
    arr = build_arrangement(c, FineFamilySpec.single("square", H), default_window(c, 2))
    sys = assemble_system(arr)
    tr = propagation_trace(sys, 0)
    assert not tr.found
    assert all(s.certified(sys) for s in tr.steps)


def test_propagation_trace_bad_seed(propagation):
    with pytest.raises(ValueError):
        propagation_trace(propagation[1].cells[0].system, -1)


def test_parse_shift():
    assert parse_shift("1/2+0*sqrt(3),1/2*sqrt(3)") == (H, S3 * H)
    for bad in ["1/2", "a,b", "1,2,3"]:
        with pytest.raises(ValueError):
            parse_shift(bad)
