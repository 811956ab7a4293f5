"""Refinement equations over a window, decided by exact elimination.

The coarse indicator ``H`` is refinable in a family of fine tessellations
when weights ``w`` on fine cells exist with ``sum_j sum_c w[j, c] 1_c = H``.
Intersecting the coarse cell with one fine cell of every family gives
regions on which both sides are constant; each region yields one 0/1
equation ``sum(member weights) = target``.  Truncating to a window keeps a
subsystem of the infinite one, so an infeasible window proves
non-refinability; a feasible window gives compactly supported weights,
which are re-checked on a larger window.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exactnum import QuadExt, format_exact, parse_exact
from .geometry import ConvexPolygon, Point2, add, clip, orient, pt, split_by_polygon, sub
from .tess2d import (
    CellId,
    StraddleReport,
    Tessellation2D,
    Window,
    cells_in_window,
    make_tessellation,
    straddle_test,
)

S3 = QuadExt.sqrt(3)
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class FineFamilySpec:
    base: Tessellation2D
    shifts: tuple

    def __post_init__(self):
        shifts = tuple(pt(*s) for s in self.shifts)
        if not shifts:
            raise ValueError("need at least one shift")
        if len(set(shifts)) != len(shifts):
            raise ValueError("shifts must be distinct")
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "_fams", tuple(
            Tessellation2D(self.base.kind, self.base.prototypes, self.base.basis,
                           self.base.scale, add(self.base.shift, s)) for s in shifts))

    @property
    def J(self) -> int:
        return len(self.shifts)

    def family(self, j: int) -> Tessellation2D:
        return self._fams[j]

    @classmethod
    def single(cls, kind: str, scale) -> FineFamilySpec:
        return cls(make_tessellation(kind, scale), ((0, 0),))


def lozenge_families() -> FineFamilySpec:
    """Three half-scale hexagonal tessellations offset by half a fine period.

    Reconstructed from the three drawn hexagons centred at (0, sqrt3),
    (-3/2, sqrt3) and (-3/4, 3 sqrt3/4).
    """
    return FineFamilySpec(make_tessellation("hexagonal", HALF),
                          ((0, 0), (0, S3 * HALF), (Fraction(3, 4), S3 / 4)))


def propagation_families() -> FineFamilySpec:
    """Half-scale hexagons plus copies shifted by (c, s) and (-c, s), c=cos 60, s=sin 60."""
    return FineFamilySpec(make_tessellation("hexagonal", HALF),
                          ((0, 0), (HALF, S3 * HALF), (-HALF, S3 * HALF)))


# ---------------------------------------------------------------------------
# Arrangement

@dataclass(frozen=True)
class Region:
    polygon: ConvexPolygon
    membership: tuple  # one CellId per family
    target: int


@dataclass
class Arrangement:
    regions: list
    window: Window
    coarse_cell: ConvexPolygon
    J: int

    def area(self) -> QuadExt:
        return sum((r.polygon.area() for r in self.regions), QuadExt(0))


def _pieces_in_family(poly: ConvexPolygon, tess: Tessellation2D):
    out = []
    for i, j in tess.candidate_translates(poly.bbox):
        for k in range(len(tess.prototypes)):
            cid = ((i, j), k)
            piece = clip(poly, tess.cell(cid))
            if piece is not None:
                out.append((cid, piece))
    return out


def _check_margin(coarse_cell: ConvexPolygon, families: FineFamilySpec, window: Window):
    if not window.contains_polygon(coarse_cell):
        raise ValueError("window too small: coarse cell not inside window")
    margin = max(c.diameter_float() for c in families.base.prototypes) * float(families.base.scale)
    x0, y0, x1, y1 = coarse_cell.bbox
    wx0, wy0, wx1, wy1 = window.bbox
    if x0 - margin < wx0 or y0 - margin < wy0 or x1 + margin > wx1 or y1 + margin > wy1:
        raise ValueError("window too small: need a one-fine-cell margin around the coarse cell")


def build_arrangement(coarse_cell: ConvexPolygon, families: FineFamilySpec, window: Window,
                      check_margin: bool = True) -> Arrangement:
    if check_margin:
        _check_margin(coarse_cell, families, window)
    wpoly = window.polygon()
    regions = []
    fam0 = families.family(0)
    for cid, c in cells_in_window(fam0, window):
        piece = c if window.contains_polygon(c) else clip(c, wpoly)
        if piece is None:
            continue
        inside, outside = split_by_polygon(piece, coarse_cell)
        if inside is not None:
            regions.append(Region(inside, (cid,), 1))
        regions.extend(Region(p, (cid,), 0) for p in outside)
    for j in range(1, families.J):
        fam = families.family(j)
        nxt = []
        for r in regions:
            for cid, piece in _pieces_in_family(r.polygon, fam):
                nxt.append(Region(piece, r.membership + (cid,), r.target))
        regions = nxt
    regions.sort(key=lambda r: (r.membership, -r.target))
    return Arrangement(regions, window, coarse_cell, families.J)


def region_at(arr: Arrangement, p: Point2) -> int:
    """Index of the region whose interior contains ``p``."""
    for i, r in enumerate(arr.regions):
        if r.polygon.contains(p) and r.polygon.location(p) == 1:
            return i
    raise ValueError("point is not interior to any region")


# ---------------------------------------------------------------------------
# Linear system

@dataclass
class RefinementSystem:
    unknowns: list  # (family index, CellId)
    equations: list  # (tuple of unknown indices, target)
    regions: Optional[list] = None  # Region per equation, for tracing and drawing

    def describe(self, e: int) -> str:
        idx, t = self.equations[e]
        names = " + ".join(unknown_name(self.unknowns[u]) for u in idx)
        return f"{names} = {t}"


def unknown_name(u) -> str:
    j, ((i1, i2), k) = u
    return f"w{j}[{i1},{i2}" + (f";{k}]" if k else "]")


def assemble_system(arr: Arrangement) -> RefinementSystem:
    keys = sorted({(j, cid) for r in arr.regions for j, cid in enumerate(r.membership)})
    index = {k: i for i, k in enumerate(keys)}
    eqs = [(tuple(sorted(index[(j, cid)] for j, cid in enumerate(r.membership))), r.target)
           for r in arr.regions]
    return RefinementSystem(keys, eqs, list(arr.regions))


@dataclass
class FeasibilityResult:
    verdict: str  # "feasible" | "infeasible"
    weights: Optional[dict] = None  # unknown index -> Fraction
    certificate: Optional[list] = None  # [(equation index, Fraction multiplier)]
    free_variables: int = 0

    @property
    def feasible(self) -> bool:
        return self.verdict == "feasible"


def verify_solution(sys: RefinementSystem, weights: dict) -> bool:
    return all(sum((weights.get(u, Fraction(0)) for u in idx), Fraction(0)) == t
               for idx, t in sys.equations)


def verify_certificate(sys: RefinementSystem, certificate: Sequence) -> bool:
    """Signed sum of equations must read 0 = nonzero."""
    lhs = defaultdict(Fraction)
    rhs = Fraction(0)
    for e, m in certificate:
        idx, t = sys.equations[e]
        for u in idx:
            lhs[u] += m
        rhs += m * t
    return all(v == 0 for v in lhs.values()) and rhs != 0


def _duplicate_conflict(sys: RefinementSystem):
    seen = {}
    for e, (idx, t) in enumerate(sys.equations):
        prev = seen.get(idx)
        if prev is None:
            seen[idx] = (e, t)
        elif prev[1] != t:
            return [(prev[0], Fraction(1)), (e, Fraction(-1))]
    return None


def solve_exact(sys: RefinementSystem) -> FeasibilityResult:
    """Sparse Gaussian elimination over Q with row-combination tracking."""
    dup = _duplicate_conflict(sys)
    if dup is not None:
        return FeasibilityResult("infeasible", certificate=dup)

    pivots = {}  # col -> (row, rhs, combo)
    rank = {}  # col -> insertion order
    order = []
    for e, (idx, t) in enumerate(sys.equations):
        row = {u: Fraction(1) for u in idx}
        rhs = Fraction(t)
        combo = {e: Fraction(1)}
        while True:
            hits = [c for c in row if c in pivots]
            if not hits:
                break
            c = min(hits, key=rank.__getitem__)
            f = row[c]
            prow, prhs, pcombo = pivots[c]
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
            rhs -= f * prhs
            for k, v in pcombo.items():
                nv = combo.get(k, 0) - f * v
                if nv:
                    combo[k] = nv
                else:
                    combo.pop(k, None)
        if not row:
            if rhs != 0:
                cert = sorted(combo.items())
                return FeasibilityResult("infeasible", certificate=cert)
            continue
        pc = min(row)
        inv = 1 / row[pc]
        row = {k: v * inv for k, v in row.items()}
        pivots[pc] = (row, rhs * inv, {k: v * inv for k, v in combo.items()})
        rank[pc] = len(order)
        order.append(pc)

    x = {}
    for c in reversed(order):
        row, rhs, _ = pivots[c]
        x[c] = rhs - sum((v * x.get(k, 0) for k, v in row.items() if k != c), Fraction(0))
    weights = {u: x.get(u, Fraction(0)) for u in range(len(sys.unknowns))}
    if not verify_solution(sys, weights):
        raise AssertionError("elimination produced a non-solution")
    return FeasibilityResult("feasible", weights=weights,
                             free_variables=len(sys.unknowns) - len(order))


# ---------------------------------------------------------------------------
# Propagation of equalities between neighbouring regions

def _line_key(p: Point2, q: Point2):
    dx, dy = q[0] - p[0], q[1] - p[1]
    # a x + b y = c normalised so the first nonzero of (a, b) is 1
    a, b = dy, -dx
    c = a * p[0] + b * p[1]
    if a:
        return (QuadExt(1), b / a, c / a)
    return (QuadExt(0), QuadExt(1), c / b)


def region_adjacency(regions: Sequence[Region]) -> dict:
    """Pairs of regions sharing a boundary segment of positive length."""
    lines = defaultdict(list)
    for ri, r in enumerate(regions):
        for p, q in r.polygon.edges():
            lines[_line_key(p, q)].append((ri, p, q))
    adj = defaultdict(set)
    for segs in lines.values():
        if len(segs) < 2:
            continue
        _, p0, q0 = segs[0]
        d = sub(q0, p0)
        dd = d[0] * d[0] + d[1] * d[1]
        ivs = []
        for ri, p, q in segs:
            t0 = ((p[0] - p0[0]) * d[0] + (p[1] - p0[1]) * d[1]) / dd
            t1 = ((q[0] - p0[0]) * d[0] + (q[1] - p0[1]) * d[1]) / dd
            if t1 < t0:
                t0, t1 = t1, t0
            ivs.append((float(t0), t0, t1, ri))
        ivs.sort(key=lambda v: v[0])
        for a in range(len(ivs)):
            _, s0, s1, ra = ivs[a]
            for b in range(a + 1, len(ivs)):
                fb, u0, u1, rb = ivs[b]
                if fb > float(s1) + 1e-9:
                    break
                if ra != rb and min(s1, u1) > max(s0, u0):
                    adj[ra].add(rb)
                    adj[rb].add(ra)
    return {k: sorted(v) for k, v in adj.items()}


@dataclass
class PropagationStep:
    region_a: int
    region_b: int
    equal: tuple  # (unknown p, unknown q): w_p = w_q

    def certified(self, sys: RefinementSystem) -> bool:
        """eq(a) - eq(b) must reduce to w_p - w_q = 0."""
        (ia, ta), (ib, tb) = sys.equations[self.region_a], sys.equations[self.region_b]
        diff = defaultdict(int)
        for u in ia:
            diff[u] += 1
        for u in ib:
            diff[u] -= 1
        diff = {u: v for u, v in diff.items() if v}
        p, q = self.equal
        return ta == tb and diff == {p: 1, q: -1}


@dataclass
class PropagationTrace:
    steps: list
    contradiction: Optional[tuple] = None  # (region with target 1, region with target 0)
    certificate: Optional[list] = None

    @property
    def found(self) -> bool:
        return self.contradiction is not None


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        root = x
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(x, x) != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _contradiction(sys: RefinementSystem, steps: Sequence[PropagationStep], visited):
    uf = _UnionFind()
    for s in steps:
        uf.union(*s.equal)
    seen = {}
    for r in visited:
        idx, t = sys.equations[r]
        sig = tuple(sorted(uf.find(u) for u in idx))
        if sig in seen and seen[sig][1] != t:
            r0 = seen[sig][0]
            return (r0, r) if seen[sig][1] == 1 else (r, r0)
        seen.setdefault(sig, (r, t))
    return None


def propagation_trace(sys: RefinementSystem, seed: int) -> PropagationTrace:
    """Walk neighbouring regions from ``seed`` collecting implied equalities.

    Two neighbouring regions with the same target whose member sets differ
    in exactly one family give ``w_p = w_q``.  Stops at the first state in
    which a target-1 and a target-0 region have equal sums, i.e. 1 = 0.
    """
    if sys.regions is None:
        raise ValueError("system carries no region geometry")
    if not 0 <= seed < len(sys.equations):
        raise ValueError(f"seed {seed} is not a region id")
    adj = region_adjacency(sys.regions)
    steps: list[PropagationStep] = []
    order = [seed]
    visited = {seed}
    queue = deque([seed])
    while queue:
        a = queue.popleft()
        for b in adj.get(a, ()):
            ia, ta = sys.equations[a]
            ib, tb = sys.equations[b]
            if ta == tb:
                only_a = set(ia) - set(ib)
                only_b = set(ib) - set(ia)
                if len(only_a) == 1 and len(only_b) == 1:
                    steps.append(PropagationStep(a, b, (only_a.pop(), only_b.pop())))
            if b not in visited:
                visited.add(b)
                order.append(b)
                queue.append(b)
    if _contradiction(sys, steps, order) is None:
        return PropagationTrace(steps)
    # shortest prefix of the walk that already yields 1 = 0
    lo, hi = 0, len(steps)
    while lo < hi:
        mid = (lo + hi) // 2
        if _contradiction(sys, steps[:mid], order) is not None:
            hi = mid
        else:
            lo = mid + 1
    prefix = steps[:lo]
    r1, r0 = _contradiction(sys, prefix, order)
    chain, cert = _explain(sys, prefix, r1, r0)
    return PropagationTrace(chain, (r1, r0), cert)


def _explain(sys, steps, r1, r0):
    """Keep only the equalities on paths pairing the two regions' members."""
    graph = defaultdict(list)
    for k, s in enumerate(steps):
        p, q = s.equal
        graph[p].append((q, k, 1))
        graph[q].append((p, k, -1))
    uf = _UnionFind()
    for s in steps:
        uf.union(*s.equal)
    left = list(sys.equations[r1][0])
    right = list(sys.equations[r0][0])
    pairs = []
    for u in left:
        v = next(v for v in right if uf.find(v) == uf.find(u))
        right.remove(v)
        pairs.append((u, v))
    used = {}
    for u, v in pairs:
        prev = {u: None}
        q = deque([u])
        while q and v not in prev:
            x = q.popleft()
            for y, k, sgn in graph[x]:
                if y not in prev:
                    prev[y] = (x, k, sgn)
                    q.append(y)
        x = v
        while prev[x] is not None:
            px, k, sgn = prev[x]
            # step k states w_p - w_q = 0 with p -> q; walking px -> x
            used[k] = used.get(k, 0) + sgn
            x = px
    # eq(r1) - eq(r0) - sum(sign * (eq(a) - eq(b))) has zero left side
    mult = defaultdict(Fraction)
    mult[r1] += 1
    mult[r0] -= 1
    for k, c in used.items():
        if c:
            mult[steps[k].region_a] -= c
            mult[steps[k].region_b] += c
    cert = sorted((e, m) for e, m in mult.items() if m)
    chain = [steps[k] for k in sorted(used) if used[k]]
    return chain, cert


# ---------------------------------------------------------------------------
# Driver

@dataclass
class CoarseCellResult:
    coarse_cell: CellId
    arrangement: Arrangement
    system: RefinementSystem
    result: FeasibilityResult
    reproduction_verified: Optional[bool] = None


@dataclass
class RefinabilityReport:
    inputs: dict
    straddle: Optional[StraddleReport]
    cells: list
    narrative: str = ""

    @property
    def verdict(self) -> str:
        return "refinable" if all(c.result.feasible for c in self.cells) else "not_refinable"

    @property
    def refinable(self) -> bool:
        return self.verdict == "refinable"

    def to_json(self) -> dict:
        out = {"inputs": self.inputs, "verdict": self.verdict}
        if self.straddle is not None:
            out["straddle"] = self.straddle.to_json()
        systems = []
        weights = []
        certificate = None
        for c in self.cells:
            sysj = {
                "coarse_cell": _cid(c.coarse_cell),
                "verdict": c.result.verdict,
                "regions": len(c.system.equations),
                "unknowns": len(c.system.unknowns),
            }
            if c.result.feasible:
                sysj["free_variables"] = c.result.free_variables
                sysj["reproduction_verified"] = c.reproduction_verified
                for u, v in sorted(c.result.weights.items()):
                    if v:
                        j, cid = c.system.unknowns[u]
                        weights.append({"coarse_cell": _cid(c.coarse_cell),
                                        "cell": [j] + _cid(cid), "value": format_exact(v)})
            else:
                cert = [{"equation": e, "multiplier": format_exact(m),
                         "members": [[c.system.unknowns[u][0]] + _cid(c.system.unknowns[u][1])
                                     for u in c.system.equations[e][0]],
                         "target": c.system.equations[e][1]}
                        for e, m in c.result.certificate]
                sysj["certificate_size"] = len(cert)
                if certificate is None:
                    certificate = cert
            systems.append(sysj)
        out["systems"] = systems
        if weights:
            out["weights"] = weights
        if certificate is not None:
            out["certificate"] = certificate
        out["narrative"] = self.narrative
        return out


def _cid(cid) -> list:
    (i, j), k = cid
    return [i, j, k]


def default_window(cell: ConvexPolygon, window_radius) -> Window:
    """Box around the cell with half-width ``window_radius`` cell diameters (rounded up)."""
    diam = Fraction(math.ceil(cell.diameter_float() - 1e-12))
    return Window.around(cell.centroid(), Fraction(window_radius) * diam)


def _reproduces(coarse_cell, families, window, system, weights) -> bool:
    """Exact check on a window one fine-cell wider, other weights fixed to 0."""
    margin = max(c.diameter_float() for c in families.base.prototypes) * float(families.base.scale)
    m = Fraction(math.ceil(margin * 4), 4)
    big = Window.make(window.x0 - m, window.y0 - m, window.x1 + m, window.y1 + m)
    arr = build_arrangement(coarse_cell, families, big)
    w = {system.unknowns[u]: v for u, v in weights.items()}
    for r in arr.regions:
        s = sum((w.get((j, cid), Fraction(0)) for j, cid in enumerate(r.membership)), Fraction(0))
        if s != r.target:
            return False
    return True


def check_refinability(coarse: Tessellation2D, families: FineFamilySpec, window_radius=3,
                       verify: bool = True) -> RefinabilityReport:
    """Decide refinability of every prototype cell's indicator."""
    inputs = {
        "coarse": {"kind": coarse.kind, "scale": format_exact(coarse.scale),
                   "shift": [format_exact(c) for c in coarse.shift]},
        "fine": {"kind": families.base.kind, "scale": format_exact(families.base.scale),
                 "shifts": [[format_exact(c) for c in s] for s in families.shifts]},
        "window_radius": format_exact(Fraction(window_radius)),
    }
    straddle = None
    if families.J == 1:
        c0 = coarse.cell(((0, 0), 0))
        straddle = straddle_test(coarse, families.family(0), default_window(c0, 1))
    cells = []
    for k in range(len(coarse.prototypes)):
        cid = ((0, 0), k)
        cell = coarse.cell(cid)
        window = default_window(cell, window_radius)
        arr = build_arrangement(cell, families, window)
        sys = assemble_system(arr)
        res = solve_exact(sys)
        rep = None
        if res.feasible and verify:
            rep = _reproduces(cell, families, window, sys, res.weights)
        elif not res.feasible and not verify_certificate(sys, res.certificate):
            raise AssertionError("infeasibility certificate failed verification")
        cells.append(CoarseCellResult(cid, arr, sys, res, rep))
    report = RefinabilityReport(inputs, straddle, cells)
    if straddle is not None and straddle.verdict == "straddled" and report.refinable:
        raise AssertionError("straddle pre-check contradicts solver")
    report.narrative = _narrative(report)
    return report


def _narrative(rep: RefinabilityReport) -> str:
    parts = []
    if rep.straddle is not None:
        if rep.straddle.verdict == "straddled":
            parts.append("A fine cell crosses a coarse edge, so its single weight would have "
                         "to be both 0 and 1.")
        else:
            parts.append("Every coarse edge in the window is a union of fine edges.")
    for c in rep.cells:
        r = c.result
        tag = f"coarse prototype {c.coarse_cell[1]}"
        if r.feasible:
            nz = sum(1 for v in r.weights.values() if v)
            parts.append(f"{tag}: feasible with compactly supported weights ({nz} nonzero, "
                         f"{r.free_variables} free set to 0); reproduction on the enlarged "
                         f"window {'verified' if c.reproduction_verified else 'NOT verified'}.")
        else:
            parts.append(f"{tag}: infeasible; {len(r.certificate)} equations combine to 0 = "
                         f"{format_exact(_cert_rhs(c.system, r.certificate))}.")
    parts.append("Verdict: " + rep.verdict.replace("_", " ") + ".")
    return " ".join(parts)


def _cert_rhs(sys, cert) -> Fraction:
    return sum((m * sys.equations[e][1] for e, m in cert), Fraction(0))


def parse_shift(text: str) -> Point2:
    """``"1/2+0*sqrt(3),1/2*sqrt(3)"`` -> exact point."""
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"shift must be 'x,y': {text!r}")
    return (parse_exact(parts[0]), parse_exact(parts[1]))


def random_rational_point(rng: random.Random, window: Window, denom: int = 10**6) -> Point2:
    """Rational point in the window: a corner plus rational multiples of the side lengths."""
    tx, ty = Fraction(rng.randrange(denom + 1), denom), Fraction(rng.randrange(denom + 1), denom)
    return (window.x0 + (window.x1 - window.x0) * tx, window.y0 + (window.y1 - window.y0) * ty)


def spot_check(coarse: Tessellation2D, families: FineFamilySpec, report: RefinabilityReport,
               points: int, seed: int = 0) -> dict:
    """Compare coarse indicator and weighted fine sum exactly at random points.

    Points on a coarse or fine edge are redrawn, since indicator values
    there depend on a boundary convention.
    """
    if not report.refinable:
        raise ValueError("spot check needs a refinable report")
    rng = random.Random(seed)
    fams = [families.family(j) for j in range(families.J)]
    checked = mismatches = redrawn = 0
    for idx, c in enumerate(report.cells):
        cell = coarse.cell(c.coarse_cell)
        w = {c.system.unknowns[u]: v for u, v in c.result.weights.items() if v}
        window = c.arrangement.window
        n = points // len(report.cells) + (idx < points % len(report.cells))
        done = 0
        while done < n:
            p = random_rational_point(rng, window)
            loc = cell.location(p)
            hits = [f.locate(p) for f in fams]
            if loc == 0 or any(h is None for h in hits):
                redrawn += 1
                continue
            total = sum((w.get((j, h[0]), Fraction(0)) for j, h in enumerate(hits)), Fraction(0))
            if total != (1 if loc == 1 else 0):
                mismatches += 1
            done += 1
        checked += done
    return {"points": checked, "mismatches": mismatches, "redrawn": redrawn, "seed": seed}
