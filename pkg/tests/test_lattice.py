from fractions import Fraction

import pytest

from vorefine.exactnum import QuadExt, dot, format_exact, mat_mul, parse_exact, transpose, identity
from vorefine.lattice import (
    LatticeFamily,
    a_family_constant,
    lattice_report,
    make_lattice,
    neighbor_pair,
    obtuse_inner_product,
    parse_family,
    refinability_ruled_out,
)


def product(spec):
    return obtuse_inner_product(make_lattice(parse_family(spec)))


@pytest.mark.parametrize("spec,value", [
    ("D:3", "3"), ("D:7", "3"), ("cube:2", "0"), ("cube:6", "0"), ("cube-diag:4", "1"),
    ("E6", "1"), ("E7", "1"), ("E8", "1"), ("tri2d", "-1/2"),
    # from the generator I + (c/n) J, by direct multiplication
    ("A:2", "1+1/2*sqrt(3)"), ("A:3", "41/27"),
    ("Astar:2", "1/3+1/6*sqrt(3)"), ("Astar:3", "43/54"),
    ("Dstar:3", "1/2"), ("Dstar:4", "1"), ("Dstar:9", "1"),
])
def test_inner_products(spec, value):
    assert product(spec) == parse_exact(value)


def test_a_constant():
    c2 = a_family_constant(2)
    assert c2 == (QuadExt.sqrt(3) - 1) / 2
    assert a_family_constant(3) == Fraction(1, 3)


@pytest.mark.parametrize("n", range(2, 13))
def test_a_and_dual_ruled_out(n):
    for tag in ("A", "Astar"):
        lat = make_lattice(LatticeFamily(tag, n))
        assert refinability_ruled_out(lat)[0]


@pytest.mark.parametrize("n", range(3, 13))
def test_dual_d_is_inverse_transpose(n):
    d = make_lattice(LatticeFamily("D", n)).generator
    ds = make_lattice(LatticeFamily("Dstar", n)).generator
    assert mat_mul(transpose(d), ds) == identity(n)
    assert product(f"Dstar:{n}").sign() > 0


def test_cube_not_ruled_out():
    ruled, reason = refinability_ruled_out(make_lattice(parse_family("cube:4")))
    assert not ruled and "= 0" in reason


def test_triangular_not_ruled_out():
    assert not refinability_ruled_out(make_lattice(parse_family("tri2d")))[0]


def test_e8_pair_are_roots():
    v, w = neighbor_pair(make_lattice(parse_family("E8")))
    assert dot(v, v) == 2 and dot(w, w) == 2


@pytest.mark.parametrize("bad", ["A:1", "D:2", "E8:7", "Q:3", "A", "A:x", "cube:1"])
def test_bad_specs(bad):
    with pytest.raises(ValueError):
        parse_family(bad)


def test_report_round_trips_and_flags():
    rep = lattice_report(parse_family("A:4"))
    assert parse_exact(rep["inner_product"]) == product("A:4")
    assert rep["ruled_out"] is True
    assert rep["notes"]  # closed form differs from the construction
    assert lattice_report(parse_family("D:5"))["notes"] == []
    assert format_exact(parse_exact(rep["closed_form"])) == rep["closed_form"]
