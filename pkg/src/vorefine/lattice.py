"""Root lattices and the obtuse-facet refinability test.

For each family we pick two facet-adjacent nearest neighbours ``v, w`` of
the origin.  If ``v . w > 0`` the corresponding Voronoi facets meet at an
obtuse angle, and no space of cell indicator functions on the lattice can
be refinable (provided reflection across a facet maps cells to cells,
which is assumed per family rather than checked).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exactnum import (
    ExactMatrix,
    QuadExt,
    Vector,
    dot,
    format_exact,
    identity,
    mat_apply,
    mat_inverse,
    matrix,
    transpose,
    unit,
    vec_add,
)

GENERATOR_TAGS = ("A", "Astar", "D", "Dstar", "CartesianCube", "CubeDiagonalSplit")
FIXED_DIM = {"E6": 6, "E7": 7, "E8": 8, "Triangular2D": 2}
ALL_TAGS = GENERATOR_TAGS + tuple(FIXED_DIM)

_CLI_NAMES = {
    "A": "A", "Astar": "Astar", "D": "D", "Dstar": "Dstar",
    "cube": "CartesianCube", "cube-diag": "CubeDiagonalSplit",
    "E6": "E6", "E7": "E7", "E8": "E8", "tri2d": "Triangular2D",
}


@dataclass(frozen=True)
class LatticeFamily:
    tag: str
    n: int

    def __post_init__(self):
        if self.tag not in ALL_TAGS:
            raise ValueError(f"unknown lattice family {self.tag!r}")
        if self.tag in FIXED_DIM and self.n != FIXED_DIM[self.tag]:
            raise ValueError(f"{self.tag} is fixed to n={FIXED_DIM[self.tag]}")
        if self.tag in ("A", "Astar") and self.n < 2:
            raise ValueError(f"{self.tag} requires n >= 2")
        if self.tag in ("D", "Dstar") and self.n < 3:
            raise ValueError(f"{self.tag} requires n >= 3")
        if self.tag in ("CartesianCube", "CubeDiagonalSplit") and self.n < 2:
            raise ValueError(f"{self.tag} requires n >= 2")

    @property
    def name(self) -> str:
        if self.tag in FIXED_DIM:
            return self.tag
        return f"{self.tag}_{self.n}"


def parse_family(spec: str) -> LatticeFamily:
    """Parse CLI names such as ``"A:5"``, ``"cube-diag:4"``, ``"E8"``, ``"tri2d"``."""
    name, _, dim = spec.strip().partition(":")
    if name not in _CLI_NAMES:
        raise ValueError(f"unknown lattice family {spec!r}")
    tag = _CLI_NAMES[name]
    if tag in FIXED_DIM:
        if dim and int(dim) != FIXED_DIM[tag]:
            raise ValueError(f"{name} has fixed dimension {FIXED_DIM[tag]}")
        return LatticeFamily(tag, FIXED_DIM[tag])
    if not dim:
        raise ValueError(f"family {name!r} needs a dimension, e.g. {name}:4")
    try:
        n = int(dim)
    except ValueError:
        raise ValueError(f"bad dimension in {spec!r}") from None
    return LatticeFamily(tag, n)


@dataclass(frozen=True)
class Lattice:
    family: LatticeFamily
    generator: Optional[ExactMatrix] = None
    stored_pair: Optional[tuple[Vector, Vector]] = None
    assumptions: tuple[str, ...] = field(default=())


def a_family_constant(n: int, dual: bool = False) -> QuadExt:
    """c_n = (-1 + sqrt(n+1))/n, or (-1 + 1/sqrt(n+1))/n for the dual."""
    r = QuadExt.sqrt(n + 1)
    if dual:
        r = r.inverse()
    return (r - 1) / n


def _a_generator(n: int, dual: bool) -> ExactMatrix:
    off = a_family_constant(n, dual) / n
    return matrix([[off + (1 if i == j else 0) for j in range(n)] for i in range(n)])


def _d_generator(n: int) -> ExactMatrix:
    # [[I_{n-1}, -e_{n-1}], [-j^T, -1]]
    rows = []
    for i in range(n - 1):
        row = [1 if i == j else 0 for j in range(n - 1)]
        row.append(-1 if i == n - 2 else 0)
        rows.append(row)
    rows.append([-1] * n)
    return matrix(rows)


def make_lattice(family: LatticeFamily) -> Lattice:
    tag, n = family.tag, family.n
    reflect = ("reflection of a cell across a facet is a cell (assumed, not verified)",)
    if tag in ("A", "Astar"):
        return Lattice(family, generator=_a_generator(n, tag == "Astar"), assumptions=reflect)
    if tag == "D":
        return Lattice(family, generator=_d_generator(n), assumptions=reflect)
    if tag == "Dstar":
        return Lattice(family, generator=transpose(mat_inverse(_d_generator(n))),
                       assumptions=reflect)
    if tag == "CartesianCube":
        # facet neighbours of the cube are e1 and e2
        return Lattice(family, generator=identity(n),
                       stored_pair=(unit(n, 0), unit(n, 1)), assumptions=reflect)
    if tag == "CubeDiagonalSplit":
        j = tuple(QuadExt(1) for _ in range(n))
        return Lattice(family, generator=identity(n), stored_pair=(unit(n, 0), j),
                       assumptions=reflect)
    half = Fraction(1, 2)
    if tag == "E6":
        v = (1, 1, 0, 0, 0, 0)
        w = (half,) * 5 + (QuadExt.sqrt(3) * half,)
    elif tag == "E7":
        v = (1, 1, 0, 0, 0, 0, 0)
        w = (half,) * 6 + (QuadExt.sqrt(2) * half,)
    elif tag == "E8":
        v = (1, 1, 0, 0, 0, 0, 0, 0)
        w = (half,) * 8
    else:  # Triangular2D
        v = (1, 0)
        w = (-half, QuadExt.sqrt(3) * half)
    pair = (tuple(QuadExt(x) if not isinstance(x, QuadExt) else x for x in v),
            tuple(QuadExt(x) if not isinstance(x, QuadExt) else x for x in w))
    return Lattice(family, stored_pair=pair, assumptions=reflect)


def neighbor_pair(lat: Lattice) -> tuple[Vector, Vector]:
    if lat.stored_pair is not None:
        return lat.stored_pair
    n = lat.family.n
    e1, e2 = unit(n, 0), unit(n, 1)
    g = lat.generator
    return mat_apply(g, e1), mat_apply(g, vec_add(e1, e2))


def obtuse_inner_product(lat: Lattice) -> QuadExt:
    v, w = neighbor_pair(lat)
    return dot(v, w)


def reference_closed_form(family: LatticeFamily) -> QuadExt:
    """Reference closed forms for the neighbour products.

    For A_n, A*_n and D*_n these differ from what the generators above
    give; :func:`lattice_report` shows both.
    """
    tag, n = family.tag, family.n
    r = QuadExt.sqrt(n + 1)
    if tag == "A":
        return Fraction(2, n) * (r + (n - 1))
    if tag == "Astar":
        return (2 * r + (n * n - 2 * n - 2)) / (n * (n + 1))
    return {
        "D": QuadExt(3), "Dstar": QuadExt(2), "CartesianCube": QuadExt(0),
        "CubeDiagonalSplit": QuadExt(1), "E6": QuadExt(1), "E7": QuadExt(1),
        "E8": QuadExt(1), "Triangular2D": QuadExt(Fraction(-1, 2)),
    }[tag]


def refinability_ruled_out(lat: Lattice) -> tuple[bool, str]:
    prod = obtuse_inner_product(lat)
    s = prod.sign()
    if s > 0:
        reason = (f"{lat.family.name}: adjacent-neighbour inner product {format_exact(prod)} > 0, "
                  "facets meet at an obtuse angle; indicator space not refinable")
    else:
        rel = "= 0" if s == 0 else "< 0"
        reason = (f"{lat.family.name}: adjacent-neighbour inner product {format_exact(prod)} {rel}, "
                  "obtuse-angle test does not rule out refinability")
    return s > 0, reason


def lattice_report(family: LatticeFamily) -> dict:
    lat = make_lattice(family)
    prod = obtuse_inner_product(lat)
    closed = reference_closed_form(family)
    ruled_out, reason = refinability_ruled_out(lat)
    v, w = neighbor_pair(lat)
    notes = []
    if prod != closed:
        notes.append(f"reference closed form {format_exact(closed)} differs from the product of the "
                     f"generator; closed-form sign {closed.sign():+d}")
    if family.tag == "Astar" and family.n == 2:
        notes.append("n = 2 is not excluded for A*_n; sign evaluated, not assumed")
    if family.tag == "Triangular2D":
        notes.append("reading the reference value as '-(-1/2)' would give +1/2; -1/2 used")
    return {
        "family": family.name,
        "neighbor_pair": [[format_exact(x) for x in v], [format_exact(x) for x in w]],
        "inner_product": format_exact(prod),
        "inner_product_float": float(prod),
        "sign": prod.sign(),
        "closed_form": format_exact(closed),
        "ruled_out": ruled_out,
        "reason": reason,
        "assumptions": list(lat.assumptions),
        "notes": notes,
    }
