"""Approximation error of piecewise constants under refinement, and sampled splines.

This part is numerical (double precision), not certified.  Geometry is
taken from the exact tessellations and rounded once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage, signal

from .geometry import ConvexPolygon
from .tess2d import Tessellation2D, Window, cells_in_window, make_tessellation


# ---------------------------------------------------------------------------
# Signed distance and the smoothed indicator

def _edge_data(verts: np.ndarray):
    a = verts
    b = np.roll(verts, -1, axis=0)
    d = b - a
    length = np.hypot(d[:, 0], d[:, 1])
    normal = np.stack([d[:, 1], -d[:, 0]], axis=1) / length[:, None]  # outward for CCW
    return a, d, length, normal


def signed_distance(verts: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Signed Euclidean distance to a convex CCW polygon (negative inside)."""
    pts = np.asarray(pts, dtype=float)
    a, d, length, normal = _edge_data(verts)
    rel = pts[..., None, :] - a  # (..., n, 2)
    line = np.einsum("...nk,nk->...n", rel, normal)
    inside_d = line.max(axis=-1)
    t = np.clip(np.einsum("...nk,nk->...n", rel, d) / (length ** 2), 0.0, 1.0)
    closest = a + t[..., None] * d
    seg = np.hypot(*np.moveaxis(pts[..., None, :] - closest, -1, 0)).min(axis=-1)
    return np.where(inside_d <= 0, inside_d, seg)


def hermite_ramp(u):
    """Cubic with value 1, slope 0 at u=-1 and value 0, slope 0 at u=1."""
    u = np.clip(u, -1.0, 1.0)
    return 0.5 - 0.75 * u + 0.25 * u ** 3


@dataclass(frozen=True)
class SmoothedIndicator:
    """C^1 indicator of a convex polygon, smoothed over the band |sd| <= epsilon."""

    polygon: ConvexPolygon
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.epsilon >= self.inradius:
            raise ValueError(f"epsilon {self.epsilon} must be below the inradius {self.inradius:.6g}")

    @property
    def verts(self) -> np.ndarray:
        return np.array(self.polygon.float_vertices)

    @property
    def inradius(self) -> float:
        v = self.verts
        c = v.mean(axis=0)
        return float(-signed_distance(v, c[None, :])[0])

    def __call__(self, pts) -> np.ndarray:
        return hermite_ramp(signed_distance(self.verts, pts) / self.epsilon)


def eval_smoothed(f: SmoothedIndicator, p) -> float:
    return float(f(np.asarray([p], dtype=float))[0])


# ---------------------------------------------------------------------------
# Adaptive triangle quadrature

def _tensor_rule(order: int):
    """Collapsed tensor Gauss-Legendre rule on the reference triangle."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = (x + 1) / 2
    w = w / 2
    u, v = np.meshgrid(x, x, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    s = u.ravel()
    t = ((1 - u) * v).ravel()
    wt = (wu * wv * (1 - u)).ravel() * 2  # sums to 1: reference-area normalised
    return s, t, wt


_RULE = _tensor_rule(4)  # 16 points


def _subdivide(tri: np.ndarray) -> np.ndarray:
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    return np.concatenate([
        np.stack([a, ab, ca], 1), np.stack([ab, b, bc], 1),
        np.stack([ca, bc, c], 1), np.stack([ab, bc, ca], 1)])


def _tri_integral(fn, tri: np.ndarray) -> float:
    if len(tri) == 0:
        return 0.0
    s, t, wt = _RULE
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    pts = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :] + t[None, :, None] * (c - a)[:, None, :]
    area = 0.5 * np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    vals = fn(pts.reshape(-1, 2)).reshape(len(tri), -1)
    return float(np.sum(area * (vals @ wt)))


def fan_triangles(verts: np.ndarray) -> np.ndarray:
    c = verts.mean(axis=0)
    nxt = np.roll(verts, -1, axis=0)
    return np.stack([np.broadcast_to(c, verts.shape), verts, nxt], axis=1)


def integrate_adaptive(fn, tri: np.ndarray, depth: int, needs: Callable[[np.ndarray], np.ndarray]) -> float:
    """Integrate ``fn`` over triangles, splitting those flagged by ``needs`` up to ``depth`` times."""
    total = 0.0
    cur = tri
    for level in range(depth + 1):
        if len(cur) == 0:
            break
        mask = needs(cur) if level < depth else np.zeros(len(cur), bool)
        total += _tri_integral(fn, cur[~mask])
        cur = _subdivide(cur[mask]) if mask.any() else cur[:0]
    return total


def _band_needs(f: SmoothedIndicator):
    v, eps = f.verts, f.epsilon

    def needs(tri):
        c = tri.mean(axis=1)
        rho = np.max(np.hypot(*np.moveaxis(tri - c[:, None, :], -1, 0)), axis=1)
        d = signed_distance(v, c)
        return (np.abs(d - eps) < rho) | (np.abs(d + eps) < rho)
    return needs


def _constant_on(f: SmoothedIndicator, verts: np.ndarray) -> Optional[float]:
    """f's value if it is constant on the polygon, else None."""
    c = verts.mean(axis=0)
    rho = float(np.max(np.hypot(*(verts - c).T)))
    d = float(signed_distance(f.verts, c[None, :])[0])
    if d - rho >= f.epsilon:
        return 0.0
    if d + rho <= -f.epsilon:
        return 1.0
    return None


# ---------------------------------------------------------------------------
# Projection and error

@dataclass
class PiecewiseConstant:
    tess: Tessellation2D
    coefficients: dict  # cell id -> float
    window: Window
    resolution: int = 0


def _window_cells(tess: Tessellation2D, window: Window):
    return [(cid, np.array(c.float_vertices)) for cid, c in cells_in_window(tess, window)]


def _constant_function(value: float):
    return lambda pts: np.full(len(pts), value)


def l2_project(f, tess: Tessellation2D, window: Window, depth: int = 10) -> PiecewiseConstant:
    """Cell means of ``f`` (the L2-best piecewise constant)."""
    coeffs = {}
    smooth = isinstance(f, SmoothedIndicator)
    needs = _band_needs(f) if smooth else (lambda tri: np.zeros(len(tri), bool))
    for cid, verts in _window_cells(tess, window):
        if smooth:
            const = _constant_on(f, verts)
            if const is not None:
                coeffs[cid] = const
                continue
        tri = fan_triangles(verts)
        area = _tri_integral(_constant_function(1.0), tri)
        coeffs[cid] = integrate_adaptive(f, tri, depth, needs) / area
    return PiecewiseConstant(tess, coeffs, window, depth)


def l2_error(f, g: PiecewiseConstant, window: Window, depth: int = 10) -> float:
    """sqrt of the integral of (f - g)^2 over the cells meeting the window."""
    smooth = isinstance(f, SmoothedIndicator)
    needs = _band_needs(f) if smooth else (lambda tri: np.zeros(len(tri), bool))
    total = 0.0
    for cid, verts in _window_cells(g.tess, window):
        gc = g.coefficients.get(cid, 0.0)
        tri = fan_triangles(verts)
        if smooth:
            const = _constant_on(f, verts)
            if const is not None:
                total += (const - gc) ** 2 * _tri_integral(_constant_function(1.0), tri)
                continue
        total += integrate_adaptive(lambda p: (f(p) - gc) ** 2, tri, depth, needs)
    return math.sqrt(max(total, 0.0))


def stable_l2_error(f, tess: Tessellation2D, window: Window, start_depth: int = 6,
                    max_depth: int = 14, rel_tol: float = 0.01) -> tuple[float, int]:
    """Project and measure, deepening quadrature until one more level changes < rel_tol."""
    prev = None
    for depth in range(start_depth, max_depth + 1):
        err = l2_error(f, l2_project(f, tess, window, depth), window, depth)
        if prev is not None and abs(err - prev) <= rel_tol * max(err, 1e-300):
            return err, depth
        prev = err
    raise RuntimeError(f"quadrature not stable to {rel_tol} by depth {max_depth}")


# ---------------------------------------------------------------------------
# The refinement experiment

@dataclass
class ErrorExperimentConfig:
    kind: str = "hexagonal"
    epsilons: Sequence[float] = (0.01,)
    levels: Sequence[int] = (0, 1)
    start_depth: int = 6
    max_depth: int = 14
    rel_tol: float = 0.01


def level_tessellation(kind: str, level: int) -> Tessellation2D:
    """Level-i spaces: cells shrunk by 2**-i, a cell centred at the origin at every level."""
    s = Fraction(1, 2 ** level)
    if kind == "hexagonal":
        return make_tessellation("hexagonal", s)
    if kind == "square":
        # [-2, 2]^2 at level 0, nested dyadic squares below
        return make_tessellation("square", 4 * s, (-2, -2))
    raise ValueError(f"error experiment supports 'hexagonal' and 'square', not {kind!r}")


def experiment_window(kind: str) -> Window:
    return Window.make(-3, -3, 3, 3)


def run_error_experiment(cfg: ErrorExperimentConfig) -> list[dict]:
    if not cfg.epsilons:
        raise ValueError("empty epsilon list")
    base = level_tessellation(cfg.kind, 0).cell(((0, 0), 0))
    window = experiment_window(cfg.kind)
    rows = []
    for eps in cfg.epsilons:
        f = SmoothedIndicator(base, float(eps))
        for lvl in cfg.levels:
            err, depth = stable_l2_error(f, level_tessellation(cfg.kind, lvl), window,
                                         cfg.start_depth, cfg.max_depth, cfg.rel_tol)
            rows.append({"epsilon": float(eps), "level": int(lvl), "error": err,
                         "quadrature_resolution": depth})
    return rows


def anomalies(rows: Sequence[dict]) -> list[tuple[float, int]]:
    """(epsilon, level) pairs where err(level + 1) > err(level)."""
    by = {(r["epsilon"], r["level"]): r["error"] for r in rows}
    return sorted((e, l) for (e, l), v in by.items() if (e, l + 1) in by and by[(e, l + 1)] > v)


# ---------------------------------------------------------------------------
# Sampled convolution splines

SPLINE_KINDS = ("square", "hexagonal")


@dataclass
class SampledSpline:
    h: float
    values: np.ndarray  # values[iy, ix] at (origin[0] + ix*h, origin[1] + iy*h)
    origin: tuple
    m: int
    kind: str
    cell_center: tuple = (0.0, 0.0)


def _clip_area(poly: list, x0: float, y0: float, x1: float, y1: float) -> float:
    """Area of a convex polygon intersected with an axis-aligned box (float)."""
    pts = poly
    for axis, bound, keep_le in ((0, x0, False), (0, x1, True), (1, y0, False), (1, y1, True)):
        out = []
        n = len(pts)
        for i in range(n):
            p, q = pts[i], pts[(i + 1) % n]
            ip = p[axis] <= bound if keep_le else p[axis] >= bound
            iq = q[axis] <= bound if keep_le else q[axis] >= bound
            if ip:
                out.append(p)
            if ip != iq:
                t = (bound - p[axis]) / (q[axis] - p[axis])
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        pts = out
        if not pts:
            return 0.0
    return 0.5 * abs(sum(pts[i][0] * pts[(i + 1) % len(pts)][1] - pts[(i + 1) % len(pts)][0] * pts[i][1]
                         for i in range(len(pts))))


def _rasterize(verts: np.ndarray, h: float):
    """Pixel-coverage raster of a convex polygon on a grid of spacing h.

    Returns the array and the coordinates of the centre of pixel [0, 0].
    """
    x0, y0 = verts.min(axis=0)
    x1, y1 = verts.max(axis=0)
    nx = int(math.ceil((x1 - x0) / h - 1e-9))
    ny = int(math.ceil((y1 - y0) / h - 1e-9))
    xs = x0 + (np.arange(nx) + 0.5) * h
    ys = y0 + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(xs, ys)
    sd = signed_distance(verts, np.stack([X, Y], axis=-1))
    cov = (sd < 0).astype(float)
    half = 0.5 * h
    poly = [tuple(v) for v in verts]
    for iy, ix in zip(*np.nonzero(np.abs(sd) < h)):
        cx, cy = xs[ix], ys[iy]
        cov[iy, ix] = _clip_area(poly, cx - half, cy - half, cx + half, cy + half) / (h * h)
    return cov, (xs[0], ys[0])


def sample_convolved_spline(kind: str, m: int, resolution: int) -> SampledSpline:
    """m-fold self-convolution of the cell indicator on a grid of ``resolution``
    pixels per cell width.

    Each convolution carries the factor h^2/area so that lattice shifts sum to 1.
    """
    if kind not in SPLINE_KINDS:
        raise ValueError(f"spline sampling supports {SPLINE_KINDS}, not {kind!r}")
    if m < 0:
        raise ValueError("order m must be >= 0")
    if resolution < 64:
        raise ValueError("resolution must be at least 64 samples per cell width")
    tess = make_tessellation(kind)
    cell = tess.cell(((0, 0), 0))
    verts = np.array(cell.float_vertices)
    center = verts.mean(axis=0)
    verts = verts - center
    h = float(verts[:, 0].max() - verts[:, 0].min()) / resolution
    ind, org = _rasterize(verts, h)
    area = float(cell.area())
    vals, origin = ind, org
    for _ in range(m):
        vals = signal.fftconvolve(vals, ind) * (h * h / area)
        origin = (origin[0] + org[0], origin[1] + org[1])
    vals = np.where(vals < 1e-13, 0.0, vals) if m else vals
    return SampledSpline(h, vals, origin, m, kind, tuple(center))


def spline_values_at(spline: SampledSpline, pts: np.ndarray, order: int = 1) -> np.ndarray:
    """Interpolated values at points given relative to the cell centre."""
    ix = (pts[..., 0] - spline.origin[0]) / spline.h
    iy = (pts[..., 1] - spline.origin[1]) / spline.h
    return ndimage.map_coordinates(spline.values, [iy.ravel(), ix.ravel()], order=order,
                                   mode="constant", cval=0.0).reshape(ix.shape)


def partition_of_unity_check(spline: SampledSpline, tess: Optional[Tessellation2D] = None,
                             samples: int = 64) -> float:
    """Max |sum over lattice shifts - 1| on a grid over one fundamental domain.

    For the indicator (m = 0) points within 1.5 pixels of a cell edge are
    skipped and nearest-sample lookup is used; otherwise bilinear.
    """
    tess = tess or make_tessellation(spline.kind)
    b1, b2 = (np.array([float(c) for c in b]) for b in tess.cell_basis)
    u = (np.arange(samples) + 0.5) / samples
    U, V = np.meshgrid(u, u)
    pts = U[..., None] * b1 + V[..., None] * b2
    reach = (spline.m + 1) * max(np.hypot(*spline.values.shape) * spline.h, 1.0)
    kmax = int(math.ceil(reach / min(np.hypot(*b1), np.hypot(*b2)))) + 2
    order = 0 if spline.m == 0 else 1
    total = np.zeros(pts.shape[:-1])
    near_edge = np.zeros(pts.shape[:-1], bool)
    proto = np.array(tess.cell(((0, 0), 0)).float_vertices) - np.array(spline.cell_center)
    for i in range(-kmax, kmax + 1):
        for j in range(-kmax, kmax + 1):
            q = pts - (i * b1 + j * b2)
            total += spline_values_at(spline, q, order)
            if spline.m == 0:
                near_edge |= np.abs(signed_distance(proto, q)) < 1.5 * spline.h
    dev = np.abs(total - 1.0)
    if spline.m == 0:
        dev = dev[~near_edge]
    return float(dev.max()) if dev.size else 0.0


def support_ring(spline: SampledSpline) -> int:
    """Largest ring index of a cell holding a nonzero sample (centre cell is ring 0)."""
    tess = make_tessellation(spline.kind)
    iy, ix = np.nonzero(spline.values > 0)
    xs = spline.origin[0] + ix * spline.h + spline.cell_center[0]
    ys = spline.origin[1] + iy * spline.h + spline.cell_center[1]
    if spline.kind == "square":
        i, j = np.floor(xs).astype(int), np.floor(ys).astype(int)
        return int(np.max(np.maximum(np.abs(i), np.abs(j))))
    # hexagonal cells are Voronoi cells of their lattice: nearest lattice point
    b1, b2 = (np.array([float(c) for c in b]) for b in tess.cell_basis)
    inv = np.linalg.inv(np.stack([b1, b2], axis=1))
    uv = inv @ np.stack([xs, ys])
    base = np.floor(uv).astype(int)
    best_d = np.full(xs.shape, np.inf)
    best = np.zeros((2,) + xs.shape, int)
    for di in (-1, 0, 1, 2):
        for dj in (-1, 0, 1, 2):
            ci, cj = base[0] + di, base[1] + dj
            px = ci * b1[0] + cj * b2[0]
            py = ci * b1[1] + cj * b2[1]
            d = np.hypot(xs - px, ys - py)
            better = d < best_d
            best_d = np.where(better, d, best_d)
            best = np.where(better, np.stack([ci, cj]), best)
    i, j = best
    return int(np.max(np.maximum.reduce([np.abs(i), np.abs(j), np.abs(i + j)])))
